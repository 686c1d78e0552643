#include "outgen/outpaint.hpp"

#include <algorithm>
#include <cmath>

#include "outgen/error.hpp"

namespace outgen {

ExhaustionPolicy parse_exhaustion_policy(const std::string& name) {
  if (name == "skip") return ExhaustionPolicy::Skip;
  if (name == "keep-best") return ExhaustionPolicy::KeepBest;
  throw ConfigError("unknown exhaustion policy: " + name);
}

const char* exhaustion_policy_name(ExhaustionPolicy policy) {
  return policy == ExhaustionPolicy::Skip ? "skip" : "keep-best";
}

void AttemptPolicy::validate() const {
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

MockMode parse_mock_mode(const std::string& name) {
  if (name == "always-smooth") return MockMode::AlwaysSmooth;
  if (name == "always-noisy") return MockMode::AlwaysNoisy;
  if (name == "noisy-first-k") return MockMode::NoisyFirstK;
  throw ConfigError("unknown mock mode: " + name);
}

MockBackend::MockBackend(MockMode mode, int noisy_count)
    : mode_(mode), noisy_count_(noisy_count) {}

bool MockBackend::noisy_now() {
  int call = calls_.fetch_add(1);
  switch (mode_) {
    case MockMode::AlwaysSmooth: return false;
    case MockMode::AlwaysNoisy: return true;
    case MockMode::NoisyFirstK: return call < noisy_count_;
  }
  return false;
}

namespace {

// gentle diagonal gradient; stays well under the TV threshold at any size
cv::Mat smooth_field(int rows, int cols, uint64_t noise_seed) {
  RngStream rng(noise_seed);
  double base = rng.uniform(96.0, 160.0);
  double amp = rng.uniform(16.0, 48.0);
  double tilt = rng.uniform(0.0, 1.0);
  cv::Mat out(rows, cols, CV_8UC3);
  for (int r = 0; r < rows; ++r) {
    auto* row = out.ptr<cv::Vec3b>(r);
    for (int c = 0; c < cols; ++c) {
      double t = (tilt * c / std::max(1, cols - 1) +
                  (1 - tilt) * r / std::max(1, rows - 1));
      auto v = cv::saturate_cast<uchar>(base + amp * t);
      row[c] = {v, v, v};
    }
  }
  return out;
}

// binary block noise at roughly the TV evaluation grid, so the roughness
// survives area downscaling
cv::Mat noisy_field(int rows, int cols, uint64_t noise_seed) {
  constexpr int block = 16;
  RngStream rng(noise_seed);
  int brows = (rows + block - 1) / block, bcols = (cols + block - 1) / block;
  std::vector<uchar> values(static_cast<size_t>(brows) * bcols);
  for (auto& v : values) v = rng.uniform_int(2) ? 255 : 0;
  cv::Mat out(rows, cols, CV_8UC3);
  for (int r = 0; r < rows; ++r) {
    auto* row = out.ptr<cv::Vec3b>(r);
    for (int c = 0; c < cols; ++c) {
      uchar v = values[static_cast<size_t>(r / block) * bcols + c / block];
      row[c] = {v, v, v};
    }
  }
  return out;
}

}  // namespace

cv::Mat MockBackend::outpaint(const cv::Mat& canvas, const cv::Mat& mask,
                              const std::string&, const std::string&,
                              uint64_t noise_seed) {
  if (canvas.empty() || mask.empty() || canvas.size() != mask.size())
    throw BackendError("mock outpaint: canvas/mask mismatch");
  cv::Mat fill = noisy_now() ? noisy_field(canvas.rows, canvas.cols, noise_seed)
                             : smooth_field(canvas.rows, canvas.cols, noise_seed);
  cv::Mat out = canvas.clone();
  for (int r = 0; r < out.rows; ++r) {
    const uchar* m = mask.ptr<uchar>(r);
    auto* dst = out.ptr<cv::Vec3b>(r);
    const auto* src = fill.ptr<cv::Vec3b>(r);
    for (int c = 0; c < out.cols; ++c)
      if (m[c] != 0) dst[c] = src[c];
  }
  return out;
}

cv::Mat MockBackend::text_to_image(const std::string&, const std::string&,
                                   uint64_t noise_seed, int size) {
  if (size < 1) throw BackendError("mock text_to_image: non-positive size");
  return noisy_now() ? noisy_field(size, size, noise_seed)
                     : smooth_field(size, size, noise_seed);
}

GateProviders mock_gate_providers() {
  return {make_tv_proxy_brisque(), make_tv_proxy_clipiqa()};
}

cv::Mat clamp_preserved(const cv::Mat& canvas, const cv::Mat& mask,
                        cv::Mat generated) {
  if (generated.size() != canvas.size() || generated.type() != canvas.type())
    throw BackendError("backend returned raster with mismatched shape");
  for (int r = 0; r < canvas.rows; ++r) {
    const uchar* m = mask.ptr<uchar>(r);
    const auto* src = canvas.ptr<cv::Vec3b>(r);
    auto* dst = generated.ptr<cv::Vec3b>(r);
    for (int c = 0; c < canvas.cols; ++c)
      if (m[c] == 0) dst[c] = src[c];
  }
  return generated;
}

namespace {

struct LoopState {
  GenerationResult result;
  int best_index = -1;
  double best_clip = -1, best_tv = 0;
  std::vector<cv::Mat> scored_images;
  bool any_scored = false;
};

void finish_exhausted(LoopState& state, const AttemptPolicy& policy) {
  auto& result = state.result;
  if (!state.any_scored) {
    result.reason = "backend-dead";
    return;
  }
  if (policy.on_exhaustion == ExhaustionPolicy::KeepBest) {
    result.accepted = true;
    result.image = state.scored_images[state.best_index];
    for (const auto& rec : result.log)
      if (rec.attempt == state.best_index + 1) result.quality = rec.quality;
  } else {
    result.reason = "exhausted";
  }
}

void track_best(LoopState& state, const QualityReport& quality,
                const cv::Mat& image, int attempt_index) {
  state.any_scored = true;
  double clip = quality.clip_iqa.value_or(-1);
  bool better = state.best_index < 0 || clip > state.best_clip ||
                (clip == state.best_clip && quality.tv < state.best_tv);
  if (better) {
    state.best_index = attempt_index;
    state.best_clip = clip;
    state.best_tv = quality.tv;
  }
}

}  // namespace

GenerationResult generate_until_pass(const CanvasBundle& bundle,
                                     GenerativeBackend& backend,
                                     const GateConfig& gate,
                                     const PromptConfig& prompts,
                                     const AttemptPolicy& policy, RngStream& rng,
                                     const std::string& item_id) {
  policy.validate();
  LoopState state;
  const bool keep_images = policy.on_exhaustion == ExhaustionPolicy::KeepBest;

  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    AttemptRecord rec;
    rec.item_id = item_id.empty() ? bundle.seed_id : item_id;
    rec.attempt = attempt;
    PromptSpec prompt = build_positive(bundle.annotation.class_id, rng, prompts);
    rec.positive = prompt.positive;
    rec.negative = prompt.negative;
    rec.noise_seed = rng.next_u64();
    ++state.result.attempts;

    cv::Mat image;
    try {
      image = backend.outpaint(bundle.canvas, bundle.mask, prompt.positive,
                               prompt.negative, rec.noise_seed);
      image = clamp_preserved(bundle.canvas, bundle.mask, std::move(image));
    } catch (const std::exception& e) {
      rec.backend_error = true;
      rec.error = e.what();
      state.result.log.push_back(std::move(rec));
      if (keep_images) state.scored_images.emplace_back();
      continue;
    }

    rec.quality = assess(image, gate.providers, gate.thresholds);
    track_best(state, rec.quality, image, attempt - 1);
    if (keep_images) state.scored_images.push_back(image);

    if (rec.quality.pass_all) {
      rec.accepted = true;
      state.result.accepted = true;
      state.result.image = image;
      state.result.quality = rec.quality;
      state.result.log.push_back(std::move(rec));
      return state.result;
    }
    state.result.log.push_back(std::move(rec));
  }

  finish_exhausted(state, policy);
  return state.result;
}

GenerationResult generate_background(GenerativeBackend& backend,
                                     const GateConfig& gate,
                                     const PromptConfig& prompts,
                                     const AttemptPolicy& policy, int size,
                                     RngStream& rng, const std::string& item_id) {
  policy.validate();
  LoopState state;
  const bool keep_images = policy.on_exhaustion == ExhaustionPolicy::KeepBest;

  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    AttemptRecord rec;
    rec.item_id = item_id;
    rec.attempt = attempt;
    PromptSpec prompt = build_background_prompt(rng, prompts);
    rec.positive = prompt.positive;
    rec.negative = prompt.negative;
    rec.noise_seed = rng.next_u64();
    ++state.result.attempts;

    cv::Mat image;
    try {
      image = backend.text_to_image(prompt.positive, prompt.negative,
                                    rec.noise_seed, size);
    } catch (const std::exception& e) {
      rec.backend_error = true;
      rec.error = e.what();
      state.result.log.push_back(std::move(rec));
      if (keep_images) state.scored_images.emplace_back();
      continue;
    }

    rec.quality = assess(image, gate.providers, gate.thresholds);
    track_best(state, rec.quality, image, attempt - 1);
    if (keep_images) state.scored_images.push_back(image);

    if (rec.quality.pass_all) {
      rec.accepted = true;
      state.result.accepted = true;
      state.result.image = image;
      state.result.quality = rec.quality;
      state.result.log.push_back(std::move(rec));
      return state.result;
    }
    state.result.log.push_back(std::move(rec));
  }

  finish_exhausted(state, policy);
  return state.result;
}

}  // namespace outgen
