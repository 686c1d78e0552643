#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "outgen/dataset.hpp"
#include "outgen/outpaint.hpp"
#include "outgen/quality.hpp"

namespace outgen {

struct BackendConfig {
  std::string name = "mock";        // "mock" | "http"
  std::string mode = "always-smooth";  // mock mode
  int noisy_count = 0;              // for noisy-first-k
  std::string endpoint;
  int timeout_ms = 120000;
  int retries = 0;
};

// Which BRISQUE/CLIP-IQA adapters the gate runs with. "tv-proxy" ships
// smoothness proxies so hermetic runs can pass the full gate; "none" leaves
// both criteria skipped (the gate then never passes, by design).
inline constexpr const char* kProvidersTvProxy = "tv-proxy";
inline constexpr const char* kProvidersNone = "none";

struct PipelineConfig {
  // paths
  std::string sources_manifest;  // curated source listing (jsonl)
  std::string workdir;           // stage outputs and manifests
  std::string dataset_root;      // assembled dataset tree

  uint64_t global_seed = 0;
  int canvas_size = 512;
  double buffer_factor = 1.15;
  double min_dim = 32;
  int fill_value = 128;
  double blur_sigma_fraction = 0.5;
  bool invert_mask = false;  // write masks with 0 = generate instead
  double background_fraction = 0.10;
  int images_per_seed = 1;
  int workers = 1;

  QualityThresholds thresholds;
  SplitConfig split;
  AttemptPolicy attempts;
  BackendConfig backend;
  std::string providers = kProvidersTvProxy;
  std::string prompt_config_path;  // empty = built-in defaults

  // Forwarded verbatim to an external trainer, never interpreted here.
  nlohmann::json trainer = default_trainer_passthrough();

  static nlohmann::json default_trainer_passthrough();
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  // Numeric-range checks; path existence is verified per stage.
  void validate() const;

  std::filesystem::path workdir_path() const { return workdir; }
  std::filesystem::path seed_manifest_path() const;
  std::filesystem::path compose_manifest_path() const;
  std::filesystem::path outpaint_manifest_path() const;
  std::filesystem::path background_manifest_path() const;
  std::filesystem::path attempt_log_path() const;
  std::filesystem::path run_report_path() const;

  PromptConfig load_prompts() const;
};

}  // namespace outgen
