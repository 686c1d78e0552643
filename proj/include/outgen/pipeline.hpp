#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "outgen/config.hpp"
#include "outgen/dataset.hpp"
#include "outgen/manifest.hpp"
#include "outgen/outpaint.hpp"
#include "outgen/seed_extract.hpp"

namespace outgen {

// Stage functions read and write the manifests named in PipelineConfig so
// each stage is independently rerunnable and resumable.

std::unique_ptr<GenerativeBackend> make_backend(const PipelineConfig& cfg);
GateConfig make_gate(const PipelineConfig& cfg);

// round(f/(1-f) * vehicles) backgrounds so they make up fraction f of the set
int background_quota(int vehicle_count, double fraction);

struct ExtractStageResult {
  std::vector<SeedManifestRow> rows;
  RankingResult ranking;
  int accepted = 0, rejected = 0;
};
ExtractStageResult extract_stage(
    const PipelineConfig& cfg,
    const std::vector<std::shared_ptr<DetectorAdapter>>& ensemble = fixture_ensemble());

struct ComposeStageResult {
  std::vector<ComposeManifestRow> rows;
  int accepted = 0, rejected = 0;
};
ComposeStageResult compose_stage(const PipelineConfig& cfg);

struct OutpaintStageResult {
  std::vector<OutpaintManifestRow> rows;
  std::vector<AttemptLogRow> attempts;
  int accepted = 0, rejected = 0;
};
OutpaintStageResult outpaint_stage(const PipelineConfig& cfg,
                                   GenerativeBackend& backend,
                                   const GateConfig& gate, bool resume = false);

struct BackgroundStageResult {
  std::vector<OutpaintManifestRow> rows;
  std::vector<AttemptLogRow> attempts;
  int requested = 0, accepted = 0;
};
// count < 0 derives the quota from the outpaint manifest.
BackgroundStageResult background_stage(const PipelineConfig& cfg,
                                       GenerativeBackend& backend,
                                       const GateConfig& gate, int count = -1);

struct AssembleResult {
  SplitAssignment assignment;
  DistributionTable table;
  DatasetLayout layout;
};
AssembleResult assemble_stage(const PipelineConfig& cfg);

struct ScoreStats {
  int count = 0;
  double min = 0, mean = 0, max = 0;
};

struct RunReport {
  int seeds_total = 0, seeds_accepted = 0;
  int composed = 0, compose_rejected = 0;
  int vehicles_accepted = 0, vehicles_rejected = 0;
  std::map<std::string, int> reject_reasons;
  int backgrounds_requested = 0, backgrounds_accepted = 0;
  int attempts_total = 0;
  ScoreStats tv, brisque, clip_iqa;  // over accepted images
  nlohmann::json to_json() const;
};

// compose -> outpaint -> backgrounds over an existing seed manifest, with
// the configured backend and gate; writes all stage manifests, the attempt
// log, and the run report. Deterministic for a fixed global seed.
RunReport run_pipeline(const std::filesystem::path& seed_manifest,
                       const PipelineConfig& cfg);

}  // namespace outgen
