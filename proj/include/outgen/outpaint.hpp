#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "outgen/canvas.hpp"
#include "outgen/prompt.hpp"
#include "outgen/quality.hpp"
#include "outgen/rng.hpp"

namespace outgen {

// Prompt-guided generative backend. outpaint() must return pixels identical
// to the canvas wherever mask = 0; the orchestrator re-clamps the preserved
// region after every call regardless, since the annotation's validity
// depends on the object being untouched.
class GenerativeBackend {
 public:
  virtual ~GenerativeBackend() = default;
  virtual std::string name() const = 0;
  virtual cv::Mat outpaint(const cv::Mat& canvas, const cv::Mat& mask,
                           const std::string& positive, const std::string& negative,
                           uint64_t noise_seed) = 0;
  virtual cv::Mat text_to_image(const std::string& positive,
                                const std::string& negative, uint64_t noise_seed,
                                int size) = 0;
};

enum class ExhaustionPolicy { Skip, KeepBest };
ExhaustionPolicy parse_exhaustion_policy(const std::string& name);
const char* exhaustion_policy_name(ExhaustionPolicy policy);

struct AttemptPolicy {
  int max_attempts = 20;
  ExhaustionPolicy on_exhaustion = ExhaustionPolicy::Skip;
  void validate() const;
};

enum class MockMode { AlwaysSmooth, AlwaysNoisy, NoisyFirstK };
MockMode parse_mock_mode(const std::string& name);  // throws ConfigError

// Deterministic backend for hermetic runs: fills the mask=255 region with a
// smooth low-TV gradient or with block noise that survives downscaling,
// preserving mask=0 pixels exactly. Content depends only on the noise seed;
// only the smooth/noisy choice consults the call counter (NoisyFirstK).
class MockBackend : public GenerativeBackend {
 public:
  explicit MockBackend(MockMode mode, int noisy_count = 0);
  std::string name() const override { return "mock"; }
  cv::Mat outpaint(const cv::Mat& canvas, const cv::Mat& mask,
                   const std::string& positive, const std::string& negative,
                   uint64_t noise_seed) override;
  cv::Mat text_to_image(const std::string& positive, const std::string& negative,
                        uint64_t noise_seed, int size) override;
  int calls() const { return calls_.load(); }

 private:
  bool noisy_now();
  MockMode mode_;
  int noisy_count_;
  std::atomic<int> calls_{0};
};

// Providers that agree with the mock's smooth/noisy modes.
GateProviders mock_gate_providers();

struct GateConfig {
  GateProviders providers;
  QualityThresholds thresholds;
};

struct AttemptRecord {
  std::string item_id;
  int attempt = 0;
  uint64_t noise_seed = 0;
  std::string positive, negative;
  QualityReport quality;
  bool backend_error = false;
  std::string error;
  bool accepted = false;
};

struct GenerationResult {
  bool accepted = false;
  cv::Mat image;
  QualityReport quality;
  int attempts = 0;
  std::string reason;  // "exhausted" | "backend-dead" when rejected
  std::vector<AttemptRecord> log;
};

// Copies canvas pixels over the generated raster wherever mask == 0.
cv::Mat clamp_preserved(const cv::Mat& canvas, const cv::Mat& mask,
                        cv::Mat generated);

// Generate-score-retry loop: fresh prompt and noise seed per attempt,
// preserved region re-clamped, every attempt logged. Returns on the first
// gate pass; on exhaustion applies the policy (KeepBest = highest CLIP-IQA
// among scored attempts, falling back to lowest TV).
GenerationResult generate_until_pass(const CanvasBundle& bundle,
                                     GenerativeBackend& backend,
                                     const GateConfig& gate,
                                     const PromptConfig& prompts,
                                     const AttemptPolicy& policy, RngStream& rng,
                                     const std::string& item_id = "");

// Text-to-image loop with the same gate and policy; accepted backgrounds are
// persisted with empty label files by the pipeline.
GenerationResult generate_background(GenerativeBackend& backend,
                                     const GateConfig& gate,
                                     const PromptConfig& prompts,
                                     const AttemptPolicy& policy, int size,
                                     RngStream& rng,
                                     const std::string& item_id = "");

// Remote inference service adapter. POSTs JSON requests with base64 PNG
// payloads to <endpoint>/outpaint and <endpoint>/text_to_image and expects
// PNG bytes back. Endpoint/timeout/retries can come from the environment
// (OUTGEN_BACKEND_ENDPOINT, OUTGEN_BACKEND_TIMEOUT_MS, OUTGEN_BACKEND_RETRIES).
struct HttpBackendOptions {
  std::string endpoint;
  int timeout_ms = 120000;
  int retries = 0;
  static HttpBackendOptions from_env(const std::string& endpoint_fallback = "");
};

class HttpBackend : public GenerativeBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  ~HttpBackend() override;
  std::string name() const override { return "http"; }
  cv::Mat outpaint(const cv::Mat& canvas, const cv::Mat& mask,
                   const std::string& positive, const std::string& negative,
                   uint64_t noise_seed) override;
  cv::Mat text_to_image(const std::string& positive, const std::string& negative,
                        uint64_t noise_seed, int size) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace outgen
