#include "outgen/quality.hpp"

#include <algorithm>
#include <cmath>

#include "outgen/error.hpp"
#include "outgen/util.hpp"

namespace outgen {

const char* gate_flag_name(GateFlag flag) {
  switch (flag) {
    case GateFlag::Passed: return "passed";
    case GateFlag::Failed: return "failed";
    case GateFlag::Skipped: return "skipped";
  }
  return "unknown";
}

cv::Mat downscale_area(const cv::Mat& image, int width, int height) {
  if (image.empty()) throw ValidationError("downscale_area: empty image");
  if (width < 1 || height < 1)
    throw ValidationError("downscale_area: non-positive target size");

  cv::Mat src;
  image.convertTo(src, CV_64F);
  const int channels = src.channels();
  cv::Mat dst(height, width, CV_64FC(channels), cv::Scalar::all(0));

  const double sx = static_cast<double>(src.cols) / width;
  const double sy = static_cast<double>(src.rows) / height;

  for (int ty = 0; ty < height; ++ty) {
    const double y0 = ty * sy, y1 = (ty + 1) * sy;
    const int ry0 = static_cast<int>(std::floor(y0));
    const int ry1 = std::min(src.rows, static_cast<int>(std::ceil(y1)));
    for (int tx = 0; tx < width; ++tx) {
      const double x0 = tx * sx, x1 = (tx + 1) * sx;
      const int rx0 = static_cast<int>(std::floor(x0));
      const int rx1 = std::min(src.cols, static_cast<int>(std::ceil(x1)));
      double* acc = dst.ptr<double>(ty) + tx * channels;
      double total_weight = 0;
      for (int y = ry0; y < ry1; ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        const double* row = src.ptr<double>(y);
        for (int x = rx0; x < rx1; ++x) {
          const double w = wy * (std::min<double>(x + 1, x1) - std::max<double>(x, x0));
          total_weight += w;
          for (int c = 0; c < channels; ++c) acc[c] += w * row[x * channels + c];
        }
      }
      for (int c = 0; c < channels; ++c) acc[c] /= total_weight;
    }
  }
  return dst;
}

double tv_loss(const cv::Mat& image, int target_resolution) {
  if (image.empty()) throw ValidationError("tv_loss: empty image");
  if (target_resolution < 2)
    throw ValidationError("tv_loss: target resolution must be >= 2");

  cv::Mat small;
  if (image.cols < target_resolution || image.rows < target_resolution) {
    image.convertTo(small, CV_64F);
  } else {
    small = downscale_area(image, target_resolution, target_resolution);
  }

  const int channels = small.channels();
  const int rows = small.rows, cols = small.cols;
  const long pairs = static_cast<long>(rows) * (cols - 1) +
                     static_cast<long>(cols) * (rows - 1);
  if (pairs == 0) return 0.0;

  double channel_sum = 0;
  for (int c = 0; c < channels; ++c) {
    double sum = 0;
    for (int y = 0; y < rows; ++y) {
      const double* row = small.ptr<double>(y);
      const double* next = y + 1 < rows ? small.ptr<double>(y + 1) : nullptr;
      for (int x = 0; x < cols; ++x) {
        const double v = row[x * channels + c];
        if (x + 1 < cols) sum += std::abs(v - row[(x + 1) * channels + c]);
        if (next) sum += std::abs(v - next[x * channels + c]);
      }
    }
    channel_sum += sum / static_cast<double>(pairs);
  }
  return channel_sum / channels;
}

namespace {

GateFlag run_provider(const std::shared_ptr<IqaProvider>& provider,
                      const cv::Mat& image, double threshold,
                      std::optional<double>& score_out,
                      std::vector<std::string>& notes, const char* label) {
  if (!provider) {
    notes.push_back(std::string(label) + ": no provider");
    return GateFlag::Skipped;
  }
  double score;
  try {
    score = provider->score(image);
  } catch (const std::exception& e) {
    notes.push_back(std::string(label) + ": provider '" + provider->name() +
                    "' failed: " + e.what());
    return GateFlag::Skipped;
  }
  score_out = score;
  const bool ok = provider->direction() == ScoreDirection::LowerBetter
                      ? score <= threshold
                      : score >= threshold;
  return ok ? GateFlag::Passed : GateFlag::Failed;
}

}  // namespace

QualityReport assess(const cv::Mat& image, const GateProviders& providers,
                     const QualityThresholds& thresholds) {
  QualityReport report;
  if (image.cols < thresholds.tv_resolution || image.rows < thresholds.tv_resolution)
    report.notes.push_back("tv: image smaller than target resolution, used as-is");
  report.tv = tv_loss(image, thresholds.tv_resolution);
  report.pass_tv = report.tv <= thresholds.tv_max ? GateFlag::Passed : GateFlag::Failed;
  report.pass_brisque = run_provider(providers.brisque, image, thresholds.brisque_max,
                                     report.brisque, report.notes, "brisque");
  report.pass_clipiqa = run_provider(providers.clip_iqa, image, thresholds.clipiqa_min,
                                     report.clip_iqa, report.notes, "clip_iqa");
  report.pass_all = report.pass_tv == GateFlag::Passed &&
                    report.pass_brisque == GateFlag::Passed &&
                    report.pass_clipiqa == GateFlag::Passed;
  return report;
}

RecordedScoreProvider::RecordedScoreProvider(std::string name,
                                             ScoreDirection direction,
                                             std::map<uint64_t, double> scores)
    : name_(std::move(name)), direction_(direction), scores_(std::move(scores)) {}

double RecordedScoreProvider::score(const cv::Mat& image) {
  auto it = scores_.find(image_digest(image));
  if (it == scores_.end())
    throw ValidationError("no recorded score for image");
  return it->second;
}

namespace {

class TvProxyProvider : public IqaProvider {
 public:
  TvProxyProvider(std::string name, ScoreDirection direction, bool as_clip)
      : name_(std::move(name)), direction_(direction), as_clip_(as_clip) {}
  std::string name() const override { return name_; }
  ScoreDirection direction() const override { return direction_; }
  double score(const cv::Mat& image) override {
    double tv = tv_loss(image);
    if (!as_clip_) return tv;
    // maps tv 0 -> 1.0 and tv 15 -> 0.9 so the proxy agrees with the gate
    return std::clamp(1.0 - tv / 150.0, 0.0, 1.0);
  }

 private:
  std::string name_;
  ScoreDirection direction_;
  bool as_clip_;
};

}  // namespace

std::shared_ptr<IqaProvider> make_tv_proxy_brisque() {
  return std::make_shared<TvProxyProvider>("tv-proxy-brisque",
                                           ScoreDirection::LowerBetter, false);
}

std::shared_ptr<IqaProvider> make_tv_proxy_clipiqa() {
  return std::make_shared<TvProxyProvider>("tv-proxy-clipiqa",
                                           ScoreDirection::HigherBetter, true);
}

}  // namespace outgen
