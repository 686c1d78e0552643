#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "outgen/config.hpp"
#include "outgen/eval.hpp"
#include "outgen/pipeline.hpp"
#include "outgen/report.hpp"
#include "outgen/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitBackend = 4;
constexpr int kExitValidation = 5;
constexpr int kExitUsage = 64;

struct GlobalOptions {
  std::string config_path;
  std::string backend;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> max_attempts;
};

outgen::PipelineConfig load_config(const GlobalOptions& options) {
  if (options.config_path.empty())
    throw outgen::ConfigError("--config is required");
  auto cfg = outgen::PipelineConfig::load(options.config_path);
  if (!options.backend.empty()) cfg.backend.name = options.backend;
  if (options.seed) cfg.global_seed = *options.seed;
  if (options.workers) cfg.workers = *options.workers;
  if (options.max_attempts) cfg.attempts.max_attempts = *options.max_attempts;
  cfg.validate();
  return cfg;
}

void require_manifest(const std::filesystem::path& path, const char* stage) {
  if (!std::filesystem::exists(path))
    throw outgen::IoError(std::string(stage) + ": missing upstream manifest " +
                          path.string());
}

int run_evaluate(const std::string& labels_dir, const std::string& preds_dir,
                 const std::string& out_path, int imgsz, double conf_thr,
                 double iou_thr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(labels_dir))
    throw outgen::IoError("evaluate: labels directory not found: " + labels_dir);
  if (!fs::is_directory(preds_dir))
    throw outgen::IoError("evaluate: predictions directory not found: " + preds_dir);

  std::vector<outgen::DetectionSample> samples;
  std::vector<fs::path> label_files;
  for (const auto& entry : fs::directory_iterator(labels_dir))
    if (entry.path().extension() == ".txt") label_files.push_back(entry.path());
  std::sort(label_files.begin(), label_files.end());

  for (const auto& label_path : label_files) {
    outgen::DetectionSample sample;
    sample.image_id = label_path.stem().string();
    auto annotations = outgen::parse_labels(outgen::read_text_file(label_path));
    sample.ground_truth = outgen::denormalize_labels(annotations, imgsz, imgsz);
    fs::path pred_path = fs::path(preds_dir) / label_path.filename();
    if (fs::exists(pred_path))
      sample.predictions = outgen::parse_predictions(
          outgen::read_text_file(pred_path), imgsz, imgsz);
    samples.push_back(std::move(sample));
  }
  if (samples.empty())
    throw outgen::ValidationError("evaluate: no label files found");

  const auto& registry = outgen::ClassRegistry::standard();
  outgen::MetricsReport report =
      outgen::evaluate(samples, registry.size(), conf_thr, iou_thr);
  std::cout << report.to_text(registry);

  if (!out_path.empty()) {
    nlohmann::json j = {{"precision", report.precision},
                        {"recall", report.recall},
                        {"f1", report.f1_score},
                        {"map50", report.map50},
                        {"map50_95", report.map50_95},
                        {"fitness", report.fitness_score},
                        {"operating_confidence", report.operating_confidence}};
    outgen::write_text_file(out_path, j.dump(2) + "\n");
    outgen::write_text_file(fs::path(out_path).replace_extension(".confusion.txt"),
                            report.confusion.to_text(registry));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic outpainted detection dataset generator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  GlobalOptions options;
  app.add_option("--config", options.config_path, "pipeline config (json)");
  app.add_option("--backend", options.backend, "backend override: mock | http");
  app.add_option("--seed", options.seed, "global RNG seed override");
  app.add_option("--workers", options.workers, "outpaint worker count");
  app.add_option("--max-attempts", options.max_attempts,
                 "retry cap override per item");

  auto* cmd_extract = app.add_subcommand(
      "extract-seeds", "detect, rank, and crop seeds from source images");
  auto* cmd_compose = app.add_subcommand(
      "compose", "place seeds on canvases, render masks and annotations");
  bool invert_mask = false;
  cmd_compose->add_flag("--invert-mask", invert_mask,
                        "write masks with 0 = generate instead of 255");
  auto* cmd_outpaint =
      app.add_subcommand("outpaint", "generate-score-retry over composed canvases");
  bool resume = false;
  cmd_outpaint->add_flag("--resume", resume, "skip items already in the manifest");
  auto* cmd_backgrounds =
      app.add_subcommand("gen-backgrounds", "generate vehicle-free backgrounds");
  int bg_count = -1;
  cmd_backgrounds->add_option("--count", bg_count,
                              "backgrounds to generate (default: quota from "
                              "background_fraction)");
  auto* cmd_assemble = app.add_subcommand(
      "assemble", "stratified leak-free split and dataset layout");
  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "detection metrics from label/pred files");
  std::string eval_labels, eval_preds, eval_out;
  int eval_imgsz = 512;
  double eval_conf = 0.25, eval_iou = 0.50;
  cmd_evaluate->add_option("--labels", eval_labels, "ground-truth label dir")
      ->required();
  cmd_evaluate->add_option("--preds", eval_preds, "prediction file dir")->required();
  cmd_evaluate->add_option("--out", eval_out, "metrics report json path");
  cmd_evaluate->add_option("--imgsz", eval_imgsz, "image size for denormalizing");
  cmd_evaluate->add_option("--conf", eval_conf, "confusion confidence threshold");
  cmd_evaluate->add_option("--iou", eval_iou, "confusion IoU threshold");
  auto* cmd_report = app.add_subcommand("report", "static gallery page");
  std::string report_out;
  cmd_report->add_option("--out", report_out, "output directory (default "
                                              "<workdir>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (cmd_evaluate->parsed())
      return run_evaluate(eval_labels, eval_preds, eval_out, eval_imgsz,
                          eval_conf, eval_iou);

    outgen::PipelineConfig cfg = load_config(options);

    if (cmd_extract->parsed()) {
      auto result = outgen::extract_stage(cfg);
      std::cout << "extracted " << result.accepted << " seeds, rejected "
                << result.rejected << "; primary detector: "
                << result.ranking.ranking.front() << "\n";
    } else if (cmd_compose->parsed()) {
      require_manifest(cfg.seed_manifest_path(), "compose");
      if (invert_mask) cfg.invert_mask = true;
      auto result = outgen::compose_stage(cfg);
      std::cout << "composed " << result.accepted << " canvases, rejected "
                << result.rejected << "\n";
    } else if (cmd_outpaint->parsed()) {
      require_manifest(cfg.compose_manifest_path(), "outpaint");
      auto backend = outgen::make_backend(cfg);
      auto result =
          outgen::outpaint_stage(cfg, *backend, outgen::make_gate(cfg), resume);
      std::cout << "outpainted " << result.accepted << " images, rejected "
                << result.rejected << "\n";
    } else if (cmd_backgrounds->parsed()) {
      require_manifest(cfg.outpaint_manifest_path(), "gen-backgrounds");
      auto backend = outgen::make_backend(cfg);
      auto result = outgen::background_stage(cfg, *backend, outgen::make_gate(cfg),
                                             bg_count);
      std::cout << "backgrounds: " << result.accepted << "/" << result.requested
                << " accepted\n";
    } else if (cmd_assemble->parsed()) {
      require_manifest(cfg.outpaint_manifest_path(), "assemble");
      auto result = outgen::assemble_stage(cfg);
      std::cout << result.table.to_text(outgen::ClassRegistry::standard());
      std::cout << "dataset written to " << result.layout.root.string() << "\n";
    } else if (cmd_report->parsed()) {
      std::filesystem::path out = report_out.empty()
                                      ? cfg.workdir_path() / "report"
                                      : std::filesystem::path(report_out);
      auto index = outgen::write_gallery(cfg, out);
      std::cout << "gallery written to " << index.string() << "\n";
    }
    return kExitOk;
  } catch (const outgen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const outgen::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const outgen::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const outgen::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const outgen::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
