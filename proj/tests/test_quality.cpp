#include <doctest.h>

#include <cmath>

#include <opencv2/imgproc.hpp>

#include "oracles.hpp"
#include "testsupport.hpp"
#include "outgen/error.hpp"
#include "outgen/quality.hpp"
#include "outgen/rng.hpp"
#include "outgen/util.hpp"

using namespace outgen;

namespace {

cv::Mat random_image(int rows, int cols, uint64_t seed, int channels = 3) {
  RngStream rng(seed);
  cv::Mat img(rows, cols, CV_8UC(channels));
  for (int r = 0; r < rows; ++r) {
    uchar* row = img.ptr<uchar>(r);
    for (int c = 0; c < cols * channels; ++c)
      row[c] = static_cast<uchar>(rng.uniform_int(256));
  }
  return img;
}

cv::Mat checkerboard(int n) {
  cv::Mat img(n, n, CV_8UC1);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      img.at<uchar>(r, c) = (r + c) % 2 ? 255 : 0;
  return img;
}

}  // namespace

TEST_CASE("tv_loss on constant and checkerboard images") {
  cv::Mat constant(64, 64, CV_8UC3, cv::Scalar(100, 100, 100));
  CHECK(tv_loss(constant) == 0.0);
  // every adjacent pair differs by the full 255 range
  CHECK(tv_loss(checkerboard(32)) == doctest::Approx(255.0).epsilon(1e-12));
}

TEST_CASE("tv_loss equals the double-loop reference") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    cv::Mat img = random_image(512, 512, seed);
    CHECK(tv_loss(img) == doctest::Approx(oracles::tv_reference(img, 32)).epsilon(1e-9));
  }
  // non-divisible sizes exercise fractional pixel coverage
  cv::Mat odd = random_image(100, 75, 99);
  CHECK(tv_loss(odd) == doctest::Approx(oracles::tv_reference(odd, 32)).epsilon(1e-9));
}

TEST_CASE("tv_loss uses small images as-is") {
  cv::Mat small = random_image(16, 16, 5);
  CHECK(tv_loss(small, 32) ==
        doctest::Approx(oracles::tv_reference(small, 32)).epsilon(1e-12));
}

TEST_CASE("tv_loss is invariant under channel permutation and flips") {
  cv::Mat img = random_image(128, 128, 12);
  double base = tv_loss(img);

  std::vector<cv::Mat> channels;
  cv::split(img, channels);
  std::swap(channels[0], channels[2]);
  cv::Mat permuted;
  cv::merge(channels, permuted);
  CHECK(tv_loss(permuted) == doctest::Approx(base).epsilon(1e-12));

  cv::Mat flipped;
  cv::flip(img, flipped, 0);
  CHECK(tv_loss(flipped) == doctest::Approx(base).epsilon(1e-9));
  cv::flip(img, flipped, 1);
  CHECK(tv_loss(flipped) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("tv_loss scales linearly with intensity") {
  cv::Mat img;
  random_image(96, 96, 3).convertTo(img, CV_64F);
  double base = tv_loss(img);
  cv::Mat scaled = img * 0.37;
  CHECK(tv_loss(scaled) == doctest::Approx(0.37 * base).epsilon(1e-9));
}

TEST_CASE("downscale_area averages exactly on divisible grids") {
  cv::Mat img(4, 4, CV_8UC1);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) img.at<uchar>(r, c) = static_cast<uchar>(r * 4 + c);
  cv::Mat half = downscale_area(img, 2, 2);
  CHECK(half.at<double>(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(half.at<double>(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
}

TEST_CASE("assess applies inclusive thresholds with correct directions") {
  QualityThresholds thresholds;
  cv::Mat smooth(64, 64, CV_8UC3, cv::Scalar(128, 128, 128));

  auto recorded = [&](double brisque, double clip) {
    GateProviders providers;
    providers.brisque = std::make_shared<RecordedScoreProvider>(
        "brisque", ScoreDirection::LowerBetter,
        std::map<uint64_t, double>{{image_digest(smooth), brisque}});
    providers.clip_iqa = std::make_shared<RecordedScoreProvider>(
        "clip-iqa", ScoreDirection::HigherBetter,
        std::map<uint64_t, double>{{image_digest(smooth), clip}});
    return assess(smooth, providers, thresholds);
  };

  QualityReport pass = recorded(10, 0.95);  // tv of a constant image is 0
  CHECK(pass.pass_all);
  CHECK(pass.pass_brisque == GateFlag::Passed);
  CHECK(pass.pass_clipiqa == GateFlag::Passed);
  CHECK(pass.pass_tv == GateFlag::Passed);

  // boundary scores are inclusive: "15 or lower", "0.9 or higher"
  QualityReport boundary = recorded(15, 0.9);
  CHECK(boundary.pass_all);

  QualityReport fail = recorded(16, 0.95);
  CHECK_FALSE(fail.pass_all);
  CHECK(fail.pass_brisque == GateFlag::Failed);
}

TEST_CASE("assess marks missing or faulty providers skipped, never passed") {
  QualityThresholds thresholds;
  cv::Mat smooth(64, 64, CV_8UC3, cv::Scalar(128, 128, 128));

  QualityReport missing = assess(smooth, {}, thresholds);
  CHECK(missing.pass_brisque == GateFlag::Skipped);
  CHECK(missing.pass_clipiqa == GateFlag::Skipped);
  CHECK_FALSE(missing.pass_all);
  CHECK(missing.notes.size() == 2);

  GateProviders faulty;
  faulty.brisque = std::make_shared<RecordedScoreProvider>(
      "brisque", ScoreDirection::LowerBetter, std::map<uint64_t, double>{});
  faulty.clip_iqa = make_tv_proxy_clipiqa();
  QualityReport report = assess(smooth, faulty, thresholds);
  CHECK(report.pass_brisque == GateFlag::Skipped);  // provider threw
  CHECK(report.pass_clipiqa == GateFlag::Passed);
  CHECK_FALSE(report.pass_all);
  CHECK(report.notes.size() == 1);
}

TEST_CASE("gate decision is monotone in each score") {
  QualityThresholds thresholds;
  cv::Mat smooth(64, 64, CV_8UC3, cv::Scalar(128, 128, 128));
  RngStream rng(77);
  auto verdict = [&](double brisque, double clip) {
    GateProviders providers;
    providers.brisque = std::make_shared<RecordedScoreProvider>(
        "brisque", ScoreDirection::LowerBetter,
        std::map<uint64_t, double>{{image_digest(smooth), brisque}});
    providers.clip_iqa = std::make_shared<RecordedScoreProvider>(
        "clip-iqa", ScoreDirection::HigherBetter,
        std::map<uint64_t, double>{{image_digest(smooth), clip}});
    return assess(smooth, providers, thresholds).pass_all;
  };
  for (int i = 0; i < 200; ++i) {
    double brisque = rng.uniform(0, 30);
    double clip = rng.uniform(0.5, 1.0);
    bool before = verdict(brisque, clip);
    // improving one score never flips pass -> fail
    CHECK((!before || verdict(brisque - rng.uniform(0, 5), clip)));
    CHECK((!before || verdict(brisque, std::min(1.0, clip + rng.uniform(0, 0.2)))));
  }
}

TEST_CASE("tv proxies agree with the gate boundary") {
  cv::Mat smooth(64, 64, CV_8UC3, cv::Scalar(128, 128, 128));
  auto brisque = make_tv_proxy_brisque();
  auto clip = make_tv_proxy_clipiqa();
  CHECK(brisque->score(smooth) == 0.0);
  CHECK(clip->score(smooth) == 1.0);
  CHECK(brisque->direction() == ScoreDirection::LowerBetter);
  CHECK(clip->direction() == ScoreDirection::HigherBetter);
  cv::Mat rough = checkerboard(32);
  cv::Mat rough3;
  cv::cvtColor(rough, rough3, cv::COLOR_GRAY2BGR);
  CHECK(brisque->score(rough3) > 15.0);
  CHECK(clip->score(rough3) < 0.9);
}

TEST_CASE("tv_loss input validation") {
  CHECK_THROWS_AS(tv_loss(cv::Mat()), ValidationError);
  cv::Mat img(8, 8, CV_8UC1, cv::Scalar(0));
  CHECK_THROWS_AS(tv_loss(img, 1), ValidationError);
}
