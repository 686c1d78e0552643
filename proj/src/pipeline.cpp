#include "outgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "outgen/error.hpp"
#include "outgen/util.hpp"

namespace outgen {

std::unique_ptr<GenerativeBackend> make_backend(const PipelineConfig& cfg) {
  if (cfg.backend.name == "mock")
    return std::make_unique<MockBackend>(parse_mock_mode(cfg.backend.mode),
                                         cfg.backend.noisy_count);
  if (cfg.backend.name == "http") {
    HttpBackendOptions options = HttpBackendOptions::from_env(cfg.backend.endpoint);
    if (options.timeout_ms == 120000) options.timeout_ms = cfg.backend.timeout_ms;
    if (options.retries == 0) options.retries = cfg.backend.retries;
    return std::make_unique<HttpBackend>(std::move(options));
  }
  throw ConfigError("unknown backend: " + cfg.backend.name);
}

GateConfig make_gate(const PipelineConfig& cfg) {
  GateConfig gate;
  gate.thresholds = cfg.thresholds;
  if (cfg.providers == kProvidersTvProxy) gate.providers = mock_gate_providers();
  return gate;
}

int background_quota(int vehicle_count, double fraction) {
  if (fraction <= 0 || vehicle_count <= 0) return 0;
  return static_cast<int>(std::llround(fraction / (1 - fraction) * vehicle_count));
}

namespace {

std::string item_stem(const std::string& seed_id, int image_index) {
  return seed_id + "_" + std::to_string(image_index);
}

cv::Mat stored_mask(const cv::Mat& mask, bool invert) {
  if (!invert) return mask;
  cv::Mat out;
  cv::subtract(cv::Scalar(255), mask, out);
  return out;
}

void accumulate(ScoreStats& stats, double value) {
  if (stats.count == 0) {
    stats.min = stats.max = value;
    stats.mean = 0;
  }
  stats.min = std::min(stats.min, value);
  stats.max = std::max(stats.max, value);
  stats.mean += value;  // sum until finalize
  ++stats.count;
}

void finalize(ScoreStats& stats) {
  if (stats.count > 0) stats.mean /= stats.count;
}

nlohmann::json stats_json(const ScoreStats& stats) {
  if (stats.count == 0) return nullptr;
  return {{"count", stats.count}, {"min", stats.min},
          {"mean", stats.mean},  {"max", stats.max}};
}

}  // namespace

ExtractStageResult extract_stage(
    const PipelineConfig& cfg,
    const std::vector<std::shared_ptr<DetectorAdapter>>& ensemble) {
  if (cfg.sources_manifest.empty())
    throw ConfigError("extract: paths.sources not configured");
  auto sources = read_jsonl<SourceManifestRow>(cfg.sources_manifest);
  if (sources.empty()) throw ValidationError("extract: empty sources manifest");

  std::vector<SourceImage> images(sources.size());
  std::vector<std::string> load_errors(sources.size());
  for (size_t i = 0; i < sources.size(); ++i) {
    images[i].path = sources[i].source_path;
    try {
      images[i].pixels = read_image(sources[i].source_path);
    } catch (const IoError& e) {
      load_errors[i] = e.what();
    }
  }

  std::vector<SourceImage> calibration;
  for (size_t i = 0; i < images.size(); ++i)
    if (load_errors[i].empty()) calibration.push_back(images[i]);
  if (calibration.empty())
    throw IoError("extract: no readable source images");

  ExtractStageResult result;
  ConsensusConfig consensus;
  result.ranking = rank_detectors(calibration, ensemble, consensus);

  std::vector<std::shared_ptr<DetectorAdapter>> ranked;
  for (const auto& name : result.ranking.ranking)
    for (const auto& adapter : ensemble)
      if (adapter->name() == name) ranked.push_back(adapter);

  const auto seeds_dir = cfg.workdir_path() / "seeds";
  for (size_t i = 0; i < sources.size(); ++i) {
    SeedManifestRow row;
    row.seed_id = sources[i].seed_id.empty()
                      ? "seed-" + std::to_string(100000 + i).substr(1)
                      : sources[i].seed_id;
    row.source_path = sources[i].source_path;
    row.class_id = sources[i].class_id;
    if (!load_errors[i].empty()) {
      row.status = "rejected";
      row.reason = "unreadable";
      ++result.rejected;
      result.rows.push_back(std::move(row));
      continue;
    }
    ExtractOutcome outcome;
    try {
      outcome = extract_seed(images[i], row.seed_id, row.class_id, ranked,
                             cfg.min_dim, cfg.buffer_factor);
    } catch (const std::exception& e) {
      row.status = "rejected";
      row.reason = std::string("error: ") + e.what();
      ++result.rejected;
      result.rows.push_back(std::move(row));
      continue;
    }
    if (!outcome.accepted()) {
      row.status = "rejected";
      row.reason = outcome.reason;
      ++result.rejected;
    } else {
      const SeedRecord& seed = *outcome.seed;
      row.status = "accepted";
      row.crop_box = seed.crop_box;
      row.buffer = seed.buffer;
      row.crop_width = seed.crop_width;
      row.crop_height = seed.crop_height;
      row.image_path = (seeds_dir / (seed.seed_id + ".png")).string();
      write_image(row.image_path, seed.crop_image);
      ++result.accepted;
    }
    result.rows.push_back(std::move(row));
  }

  write_jsonl(cfg.seed_manifest_path(), result.rows);
  nlohmann::json ranking_json = {{"ranking", result.ranking.ranking},
                                 {"votes", result.ranking.votes},
                                 {"warnings", result.ranking.warnings}};
  write_text_file(cfg.workdir_path() / "detector_ranking.json",
                  ranking_json.dump(2) + "\n");
  return result;
}

namespace {

SeedRecord seed_from_row(const SeedManifestRow& row) {
  SeedRecord seed;
  seed.seed_id = row.seed_id;
  seed.class_id = row.class_id;
  seed.source_path = row.source_path;
  seed.crop_box = row.crop_box;
  seed.buffer = row.buffer;
  seed.crop_width = row.crop_width;
  seed.crop_height = row.crop_height;
  seed.crop_image = read_image(row.image_path);
  return seed;
}

}  // namespace

ComposeStageResult compose_stage(const PipelineConfig& cfg) {
  auto seed_rows = read_jsonl<SeedManifestRow>(cfg.seed_manifest_path());
  ComposeStageResult result;
  const auto canvases_dir = cfg.workdir_path() / "canvases";
  const auto masks_dir = cfg.workdir_path() / "masks";

  for (const auto& seed_row : seed_rows) {
    if (seed_row.status != "accepted") continue;
    SeedRecord seed = seed_from_row(seed_row);
    for (int index = 0; index < cfg.images_per_seed; ++index) {
      ComposeManifestRow row;
      row.seed_id = seed.seed_id;
      row.image_index = index;
      row.class_id = seed.class_id;
      row.buffer = seed.buffer;
      row.crop_width = seed.crop_width;
      row.crop_height = seed.crop_height;

      RngStream rng =
          RngStream::derive(cfg.global_seed, "compose/" + seed.seed_id, index);
      auto placement = sample_placement(seed, cfg.canvas_size, rng);
      if (!placement) {
        row.status = "rejected";
        row.reason = "unplaceable";
        ++result.rejected;
        result.rows.push_back(std::move(row));
        continue;
      }
      CanvasBundle bundle = compose_canvas(seed, *placement, cfg.fill_value,
                                           cfg.blur_sigma_fraction);
      const std::string stem = item_stem(seed.seed_id, index);
      row.status = "accepted";
      row.canvas_path = (canvases_dir / (stem + ".png")).string();
      row.mask_path = (masks_dir / (stem + ".png")).string();
      row.mask_inverted = cfg.invert_mask;
      row.annotation = bundle.annotation;
      row.placement = bundle.placement;
      write_image(row.canvas_path, bundle.canvas);
      write_image(row.mask_path, stored_mask(bundle.mask, cfg.invert_mask));
      ++result.accepted;
      result.rows.push_back(std::move(row));
    }
  }
  write_jsonl(cfg.compose_manifest_path(), result.rows);
  return result;
}

OutpaintStageResult outpaint_stage(const PipelineConfig& cfg,
                                   GenerativeBackend& backend,
                                   const GateConfig& gate, bool resume) {
  auto compose_rows = read_jsonl<ComposeManifestRow>(cfg.compose_manifest_path());

  std::vector<OutpaintManifestRow> existing;
  std::vector<AttemptLogRow> existing_attempts;
  if (resume && std::filesystem::exists(cfg.outpaint_manifest_path())) {
    existing = read_jsonl<OutpaintManifestRow>(cfg.outpaint_manifest_path());
    if (std::filesystem::exists(cfg.attempt_log_path()))
      existing_attempts = read_jsonl<AttemptLogRow>(cfg.attempt_log_path());
  }
  std::set<std::string> done;
  for (const auto& row : existing) done.insert(row.item_id);

  std::vector<const ComposeManifestRow*> items;
  for (const auto& row : compose_rows)
    if (row.status == "accepted" && !done.count(row.item_id()))
      items.push_back(&row);

  const auto out_dir = cfg.workdir_path() / "outpainted";
  const auto labels_dir = cfg.workdir_path() / "outpaint_labels";
  std::filesystem::create_directories(out_dir);
  std::filesystem::create_directories(labels_dir);

  std::vector<OutpaintManifestRow> rows(items.size());
  std::vector<std::vector<AttemptLogRow>> attempt_logs(items.size());
  std::atomic<size_t> next{0};
  const PromptConfig prompts = cfg.load_prompts();

  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const ComposeManifestRow& item = *items[i];
      OutpaintManifestRow& row = rows[i];
      row.item_id = item.item_id();
      row.kind = "vehicle";
      row.seed_id = item.seed_id;
      row.image_index = item.image_index;
      row.class_id = item.class_id;
      try {
        CanvasBundle bundle;
        bundle.canvas = read_image(item.canvas_path);
        bundle.mask =
            stored_mask(read_image(item.mask_path, true), item.mask_inverted);
        bundle.annotation = item.annotation;
        bundle.placement = item.placement;
        bundle.buffer = item.buffer;
        bundle.crop_width = item.crop_width;
        bundle.crop_height = item.crop_height;
        bundle.seed_id = item.seed_id;

        RngStream rng = RngStream::derive(cfg.global_seed,
                                          "outpaint/" + row.item_id, 0);
        GenerationResult gen = generate_until_pass(bundle, backend, gate, prompts,
                                                   cfg.attempts, rng, row.item_id);
        for (const auto& rec : gen.log)
          attempt_logs[i].push_back(attempt_log_row(rec));
        row.attempts = gen.attempts;
        if (gen.accepted) {
          row.status = "accepted";
          row.image_path = (out_dir / (row.item_id + ".png")).string();
          row.label_path = (labels_dir / (row.item_id + ".txt")).string();
          write_image(row.image_path, gen.image);
          write_text_file(row.label_path, serialize_labels({item.annotation}));
          row.tv = gen.quality.tv;
          row.brisque = gen.quality.brisque;
          row.clip_iqa = gen.quality.clip_iqa;
        } else {
          row.status = "rejected";
          row.reason = gen.reason;
        }
      } catch (const std::exception& e) {
        row.status = "rejected";
        row.reason = std::string("error: ") + e.what();
      }
    }
  };

  const int workers = std::max(1, cfg.workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers - 1; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  OutpaintStageResult result;
  result.rows = std::move(existing);
  result.attempts = std::move(existing_attempts);
  for (auto& row : rows) {
    row.status == "accepted" ? ++result.accepted : ++result.rejected;
    result.rows.push_back(std::move(row));
  }
  for (auto& log : attempt_logs)
    for (auto& entry : log) result.attempts.push_back(std::move(entry));

  write_jsonl(cfg.outpaint_manifest_path(), result.rows);
  write_jsonl(cfg.attempt_log_path(), result.attempts);
  return result;
}

BackgroundStageResult background_stage(const PipelineConfig& cfg,
                                       GenerativeBackend& backend,
                                       const GateConfig& gate, int count) {
  BackgroundStageResult result;
  if (count < 0) {
    auto rows = read_jsonl<OutpaintManifestRow>(cfg.outpaint_manifest_path());
    int vehicles = 0;
    for (const auto& row : rows)
      if (row.kind == "vehicle" && row.status == "accepted") ++vehicles;
    count = background_quota(vehicles, cfg.background_fraction);
  }
  result.requested = count;

  const auto out_dir = cfg.workdir_path() / "backgrounds";
  const auto labels_dir = cfg.workdir_path() / "background_labels";
  PromptConfig prompts = cfg.load_prompts();

  for (int i = 0; i < count; ++i) {
    OutpaintManifestRow row;
    char id[32];
    std::snprintf(id, sizeof(id), "bg-%05d", i);
    row.item_id = id;
    row.kind = "background";
    RngStream rng = RngStream::derive(cfg.global_seed, "background", i);
    GenerationResult gen = generate_background(backend, gate, prompts,
                                               cfg.attempts, cfg.canvas_size, rng,
                                               row.item_id);
    for (const auto& rec : gen.log)
      result.attempts.push_back(attempt_log_row(rec));
    row.attempts = gen.attempts;
    if (gen.accepted) {
      row.status = "accepted";
      row.image_path = (out_dir / (row.item_id + ".png")).string();
      row.label_path = (labels_dir / (row.item_id + ".txt")).string();
      write_image(row.image_path, gen.image);
      write_text_file(row.label_path, "");  // background convention
      row.tv = gen.quality.tv;
      row.brisque = gen.quality.brisque;
      row.clip_iqa = gen.quality.clip_iqa;
      ++result.accepted;
    } else {
      row.status = "rejected";
      row.reason = gen.reason;
    }
    result.rows.push_back(std::move(row));
  }

  write_jsonl(cfg.background_manifest_path(), result.rows);
  // backgrounds share the attempt log; keep vehicle entries in place
  std::vector<AttemptLogRow> log;
  if (std::filesystem::exists(cfg.attempt_log_path())) {
    for (auto& entry : read_jsonl<AttemptLogRow>(cfg.attempt_log_path()))
      if (entry.item_id.rfind("bg-", 0) != 0) log.push_back(std::move(entry));
  }
  log.insert(log.end(), result.attempts.begin(), result.attempts.end());
  write_jsonl(cfg.attempt_log_path(), log);
  return result;
}

AssembleResult assemble_stage(const PipelineConfig& cfg) {
  if (cfg.dataset_root.empty())
    throw ConfigError("assemble: paths.dataset_root not configured");
  auto outpaint_rows = read_jsonl<OutpaintManifestRow>(cfg.outpaint_manifest_path());
  std::vector<OutpaintManifestRow> all = outpaint_rows;
  if (std::filesystem::exists(cfg.background_manifest_path())) {
    for (auto& row : read_jsonl<OutpaintManifestRow>(cfg.background_manifest_path()))
      all.push_back(std::move(row));
  }

  std::vector<SplitRecord> records;
  std::vector<DatasetItem> items;
  for (const auto& row : all) {
    if (row.status != "accepted") continue;
    const bool background = row.kind == "background";
    const std::string unit = background ? row.item_id : row.seed_id;
    records.push_back({unit, background ? kBackgroundClassId : row.class_id});
    DatasetItem item;
    item.stem = row.item_id;
    item.seed_id = unit;
    item.image_path = row.image_path;
    if (row.label_path.empty() || !std::filesystem::exists(row.label_path))
      throw IoError("missing label for image " + row.item_id);
    item.label_text = read_text_file(row.label_path);
    items.push_back(std::move(item));
  }
  if (records.empty())
    throw ValidationError("assemble: no accepted images to assemble");

  RngStream rng = RngStream::derive(cfg.global_seed, "split");
  AssembleResult result;
  result.assignment = stratified_split(records, cfg.split, rng);
  result.table = distribution_table(result.assignment);
  result.layout = write_dataset(items, result.assignment, cfg.dataset_root);
  write_text_file(cfg.workdir_path() / "distribution.txt",
                  result.table.to_text(ClassRegistry::standard()));
  return result;
}

nlohmann::json RunReport::to_json() const {
  return {{"seeds_total", seeds_total},
          {"seeds_accepted", seeds_accepted},
          {"composed", composed},
          {"compose_rejected", compose_rejected},
          {"vehicles_accepted", vehicles_accepted},
          {"vehicles_rejected", vehicles_rejected},
          {"reject_reasons", reject_reasons},
          {"backgrounds_requested", backgrounds_requested},
          {"backgrounds_accepted", backgrounds_accepted},
          {"attempts_total", attempts_total},
          {"tv", stats_json(tv)},
          {"brisque", stats_json(brisque)},
          {"clip_iqa", stats_json(clip_iqa)}};
}

RunReport run_pipeline(const std::filesystem::path& seed_manifest,
                       const PipelineConfig& cfg) {
  PipelineConfig local = cfg;
  if (seed_manifest != local.seed_manifest_path()) {
    std::filesystem::create_directories(local.workdir_path());
    std::filesystem::copy_file(seed_manifest, local.seed_manifest_path(),
                               std::filesystem::copy_options::overwrite_existing);
  }

  RunReport report;
  auto seed_rows = read_jsonl<SeedManifestRow>(local.seed_manifest_path());
  report.seeds_total = static_cast<int>(seed_rows.size());
  for (const auto& row : seed_rows)
    if (row.status == "accepted") ++report.seeds_accepted;

  auto backend = make_backend(local);
  GateConfig gate = make_gate(local);

  ComposeStageResult composed = compose_stage(local);
  report.composed = composed.accepted;
  report.compose_rejected = composed.rejected;

  OutpaintStageResult outpainted = outpaint_stage(local, *backend, gate, false);
  report.vehicles_accepted = outpainted.accepted;
  report.vehicles_rejected = outpainted.rejected;

  BackgroundStageResult backgrounds = background_stage(local, *backend, gate, -1);
  report.backgrounds_requested = backgrounds.requested;
  report.backgrounds_accepted = backgrounds.accepted;

  std::vector<OutpaintManifestRow> all = outpainted.rows;
  all.insert(all.end(), backgrounds.rows.begin(), backgrounds.rows.end());
  for (const auto& row : all) {
    if (row.status == "accepted") {
      if (row.tv) accumulate(report.tv, *row.tv);
      if (row.brisque) accumulate(report.brisque, *row.brisque);
      if (row.clip_iqa) accumulate(report.clip_iqa, *row.clip_iqa);
    } else if (!row.reason.empty()) {
      ++report.reject_reasons[row.reason];
    }
  }
  finalize(report.tv);
  finalize(report.brisque);
  finalize(report.clip_iqa);
  report.attempts_total = static_cast<int>(
      outpainted.attempts.size() + backgrounds.attempts.size());

  write_text_file(local.run_report_path(), report.to_json().dump(2) + "\n");
  return report;
}

}  // namespace outgen
