#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "outgen/geometry.hpp"

namespace outgen {

struct Detection {
  PixelBox box;
  double confidence = 0.0;
  std::string coarse_class;  // detector vocabulary, e.g. "car", "bus", "truck"
};

struct SourceImage {
  cv::Mat pixels;
  std::string path;
};

// Ensemble member. detect() must be deterministic for a fixed image.
class DetectorAdapter {
 public:
  virtual ~DetectorAdapter() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Detection> detect(const SourceImage& image) = 0;
};

// Fixed ensemble order; doubles as the ranking tie-break.
const std::vector<std::string>& ensemble_order();

// Coarse detector classes treated as vehicles for largest-box selection.
const std::vector<std::string>& default_vehicle_classes();

struct ConsensusConfig {
  double vote_iou_threshold = 0.95;
  std::vector<std::string> ensemble = ensemble_order();
};

// Largest-area vehicle detection; ties broken by smaller y_min, then x_min.
std::optional<PixelBox> largest_box(
    const std::vector<Detection>& detections,
    const std::vector<std::string>& vehicle_classes = default_vehicle_classes());

// Every unordered pair with iou >= threshold gives both models one vote.
std::map<std::string, int> consensus_vote(
    const std::map<std::string, PixelBox>& per_model_boxes,
    const ConsensusConfig& cfg);

struct RankingResult {
  std::vector<std::string> ranking;  // primary first, then fallbacks
  std::map<std::string, int> votes;
  std::vector<std::string> warnings;  // detector failures, per image
};

// Sums per-image consensus votes over the calibration set; sorts detectors
// by total votes descending, ties broken by the predefined ensemble order.
RankingResult rank_detectors(
    const std::vector<SourceImage>& calibration_images,
    const std::vector<std::shared_ptr<DetectorAdapter>>& ensemble,
    const ConsensusConfig& cfg);

struct SeedRecord {
  std::string seed_id;
  int class_id = 0;  // from the human-curated manifest, not the detector
  cv::Mat crop_image;
  PixelBox crop_box;  // rasterized crop in source-image coordinates
  BufferSpec buffer;  // fractions relative to the raster crop
  std::string source_path;
  int crop_width = 0;
  int crop_height = 0;
};

struct ExtractOutcome {
  std::optional<SeedRecord> seed;
  std::string reason;  // "undetected", "below min_dim" when rejected
  bool accepted() const { return seed.has_value(); }
};

// Runs detectors in rank order until one yields a vehicle box, then crops
// with the buffer. Rejections carry a machine-readable reason.
ExtractOutcome extract_seed(
    const SourceImage& image, const std::string& seed_id, int class_id,
    const std::vector<std::shared_ptr<DetectorAdapter>>& ranked_detectors,
    double min_dim = 32.0, double buffer_factor = 1.15,
    const std::vector<std::string>& vehicle_classes = default_vehicle_classes());

// Deterministic detector that replays boxes from a sidecar fixture file
// "<image path>.boxes.json": {"<model>": [{"box":[x0,y0,x1,y1],
// "confidence":c, "class":"car"}, ...], ...}. A model entry equal to the
// string "fail" simulates a detector fault.
class FixtureDetector : public DetectorAdapter {
 public:
  explicit FixtureDetector(std::string model_name);
  std::string name() const override { return model_name_; }
  std::vector<Detection> detect(const SourceImage& image) override;

 private:
  std::string model_name_;
};

// The full fixture ensemble in the predefined order.
std::vector<std::shared_ptr<DetectorAdapter>> fixture_ensemble();

}  // namespace outgen
