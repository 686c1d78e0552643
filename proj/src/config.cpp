#include "outgen/config.hpp"

#include "outgen/error.hpp"
#include "outgen/util.hpp"

namespace outgen {

nlohmann::json PipelineConfig::default_trainer_passthrough() {
  return {{"epochs", 1000}, {"batch", 32},    {"lr0", 0.01},
          {"patience", 20}, {"imgsz", 512}};
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  try {
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      cfg.sources_manifest = p.value("sources", "");
      cfg.workdir = p.value("workdir", "");
      cfg.dataset_root = p.value("dataset_root", "");
    }
    cfg.global_seed = j.value("global_seed", cfg.global_seed);
    cfg.canvas_size = j.value("canvas_size", cfg.canvas_size);
    cfg.buffer_factor = j.value("buffer_factor", cfg.buffer_factor);
    cfg.min_dim = j.value("min_dim", cfg.min_dim);
    cfg.fill_value = j.value("fill_value", cfg.fill_value);
    cfg.blur_sigma_fraction = j.value("blur_sigma_fraction", cfg.blur_sigma_fraction);
    cfg.invert_mask = j.value("invert_mask", cfg.invert_mask);
    cfg.background_fraction = j.value("background_fraction", cfg.background_fraction);
    cfg.images_per_seed = j.value("images_per_seed", cfg.images_per_seed);
    cfg.workers = j.value("workers", cfg.workers);
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      cfg.thresholds.brisque_max = t.value("brisque_max", cfg.thresholds.brisque_max);
      cfg.thresholds.clipiqa_min = t.value("clipiqa_min", cfg.thresholds.clipiqa_min);
      cfg.thresholds.tv_max = t.value("tv_max", cfg.thresholds.tv_max);
      cfg.thresholds.tv_resolution = t.value("tv_resolution", cfg.thresholds.tv_resolution);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      cfg.split.train = s.value("train", cfg.split.train);
      cfg.split.val = s.value("val", cfg.split.val);
      cfg.split.test = s.value("test", cfg.split.test);
    }
    if (j.contains("attempts")) {
      const auto& a = j["attempts"];
      cfg.attempts.max_attempts = a.value("max_attempts", cfg.attempts.max_attempts);
      if (a.contains("on_exhaustion"))
        cfg.attempts.on_exhaustion =
            parse_exhaustion_policy(a["on_exhaustion"].get<std::string>());
    }
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      cfg.backend.name = b.value("name", cfg.backend.name);
      cfg.backend.mode = b.value("mode", cfg.backend.mode);
      cfg.backend.noisy_count = b.value("noisy_count", cfg.backend.noisy_count);
      cfg.backend.endpoint = b.value("endpoint", cfg.backend.endpoint);
      cfg.backend.timeout_ms = b.value("timeout_ms", cfg.backend.timeout_ms);
      cfg.backend.retries = b.value("retries", cfg.backend.retries);
    }
    cfg.providers = j.value("providers", cfg.providers);
    cfg.prompt_config_path = j.value("prompt_config", "");
    if (j.contains("trainer")) cfg.trainer = j["trainer"];
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config schema error: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["paths"] = {{"sources", sources_manifest},
                {"workdir", workdir},
                {"dataset_root", dataset_root}};
  j["global_seed"] = global_seed;
  j["canvas_size"] = canvas_size;
  j["buffer_factor"] = buffer_factor;
  j["min_dim"] = min_dim;
  j["fill_value"] = fill_value;
  j["blur_sigma_fraction"] = blur_sigma_fraction;
  j["invert_mask"] = invert_mask;
  j["background_fraction"] = background_fraction;
  j["images_per_seed"] = images_per_seed;
  j["workers"] = workers;
  j["thresholds"] = {{"brisque_max", thresholds.brisque_max},
                     {"clipiqa_min", thresholds.clipiqa_min},
                     {"tv_max", thresholds.tv_max},
                     {"tv_resolution", thresholds.tv_resolution}};
  j["split"] = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
  j["attempts"] = {{"max_attempts", attempts.max_attempts},
                   {"on_exhaustion", exhaustion_policy_name(attempts.on_exhaustion)}};
  j["backend"] = {{"name", backend.name},       {"mode", backend.mode},
                  {"noisy_count", backend.noisy_count},
                  {"endpoint", backend.endpoint},
                  {"timeout_ms", backend.timeout_ms},
                  {"retries", backend.retries}};
  j["providers"] = providers;
  j["prompt_config"] = prompt_config_path;
  j["trainer"] = trainer;
  return j;
}

void PipelineConfig::save(const std::filesystem::path& path) const {
  write_text_file(path, to_json().dump(2) + "\n");
}

void PipelineConfig::validate() const {
  if (canvas_size < 32) throw ConfigError("canvas_size must be >= 32");
  if (!(buffer_factor > 1)) throw ConfigError("buffer_factor must be > 1");
  if (!(min_dim > 0)) throw ConfigError("min_dim must be positive");
  if (fill_value < 0 || fill_value > 255)
    throw ConfigError("fill_value must be in [0,255]");
  if (blur_sigma_fraction < 0)
    throw ConfigError("blur_sigma_fraction must be >= 0");
  if (!(background_fraction >= 0 && background_fraction < 1))
    throw ConfigError("background_fraction must be in [0,1)");
  if (images_per_seed < 1) throw ConfigError("images_per_seed must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (thresholds.tv_resolution < 2)
    throw ConfigError("tv_resolution must be >= 2");
  split.validate();
  attempts.validate();
  if (backend.name != "mock" && backend.name != "http")
    throw ConfigError("unknown backend: " + backend.name);
  parse_mock_mode(backend.mode);
  if (providers != kProvidersTvProxy && providers != kProvidersNone)
    throw ConfigError("unknown provider set: " + providers);
}

std::filesystem::path PipelineConfig::seed_manifest_path() const {
  return workdir_path() / "seed_manifest.jsonl";
}
std::filesystem::path PipelineConfig::compose_manifest_path() const {
  return workdir_path() / "compose_manifest.jsonl";
}
std::filesystem::path PipelineConfig::outpaint_manifest_path() const {
  return workdir_path() / "outpaint_manifest.jsonl";
}
std::filesystem::path PipelineConfig::background_manifest_path() const {
  return workdir_path() / "background_manifest.jsonl";
}
std::filesystem::path PipelineConfig::attempt_log_path() const {
  return workdir_path() / "attempt_log.jsonl";
}
std::filesystem::path PipelineConfig::run_report_path() const {
  return workdir_path() / "run_report.json";
}

PromptConfig PipelineConfig::load_prompts() const {
  if (prompt_config_path.empty()) return PromptConfig::defaults();
  return PromptConfig::load(prompt_config_path);
}

}  // namespace outgen
