#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace outgen {

struct QualityThresholds {
  double brisque_max = 15.0;  // lower is better
  double clipiqa_min = 0.9;   // higher is better
  double tv_max = 15.0;
  int tv_resolution = 32;
};

enum class GateFlag { Passed, Failed, Skipped };

const char* gate_flag_name(GateFlag flag);

struct QualityReport {
  std::optional<double> brisque;
  std::optional<double> clip_iqa;
  double tv = 0.0;
  GateFlag pass_brisque = GateFlag::Skipped;
  GateFlag pass_clipiqa = GateFlag::Skipped;
  GateFlag pass_tv = GateFlag::Failed;
  bool pass_all = false;
  std::vector<std::string> notes;
};

enum class ScoreDirection { LowerBetter, HigherBetter };

// No-reference quality scorer; deterministic per image.
class IqaProvider {
 public:
  virtual ~IqaProvider() = default;
  virtual std::string name() const = 0;
  virtual ScoreDirection direction() const = 0;
  virtual double score(const cv::Mat& image) = 0;
};

// Exact fractional-coverage area averaging, per channel, CV_64F output.
cv::Mat downscale_area(const cv::Mat& image, int width, int height);

// Mean absolute difference between adjacent pixels of the image downscaled
// to target_resolution^2 (area averaging), averaged over channels. Images
// smaller than the target in either dimension are used as-is.
double tv_loss(const cv::Mat& image, int target_resolution = 32);

struct GateProviders {
  std::shared_ptr<IqaProvider> brisque;
  std::shared_ptr<IqaProvider> clip_iqa;
};

// Scores the image against all available providers plus the native TV loss
// and applies the thresholds (inclusive, direction-aware). Provider faults
// mark the flag Skipped and are recorded; assess itself never throws for
// provider failures. pass_all requires all three criteria to have Passed.
QualityReport assess(const cv::Mat& image, const GateProviders& providers,
                     const QualityThresholds& thresholds);

// Replays recorded scores keyed by image digest; throws on unknown images.
class RecordedScoreProvider : public IqaProvider {
 public:
  RecordedScoreProvider(std::string name, ScoreDirection direction,
                        std::map<uint64_t, double> scores);
  std::string name() const override { return name_; }
  ScoreDirection direction() const override { return direction_; }
  double score(const cv::Mat& image) override;

 private:
  std::string name_;
  ScoreDirection direction_;
  std::map<uint64_t, double> scores_;
};

// Smoothness-proxy providers for hermetic runs: scores derived from the
// native TV loss so they agree with the mock backend's smooth/noisy modes.
std::shared_ptr<IqaProvider> make_tv_proxy_brisque();
std::shared_ptr<IqaProvider> make_tv_proxy_clipiqa();

}  // namespace outgen
