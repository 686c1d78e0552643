#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "outgen/error.hpp"
#include "outgen/outpaint.hpp"
#include "outgen/util.hpp"

namespace outgen {

HttpBackendOptions HttpBackendOptions::from_env(const std::string& endpoint_fallback) {
  HttpBackendOptions options;
  options.endpoint = endpoint_fallback;
  if (const char* ep = std::getenv("OUTGEN_BACKEND_ENDPOINT")) options.endpoint = ep;
  if (const char* t = std::getenv("OUTGEN_BACKEND_TIMEOUT_MS"))
    options.timeout_ms = std::atoi(t);
  if (const char* r = std::getenv("OUTGEN_BACKEND_RETRIES"))
    options.retries = std::atoi(r);
  return options;
}

struct HttpBackend::Impl {
  HttpBackendOptions options;
  httplib::Client client;

  explicit Impl(HttpBackendOptions opts)
      : options(std::move(opts)), client(options.endpoint) {
    client.set_connection_timeout(0, options.timeout_ms * 1000LL);
    client.set_read_timeout(options.timeout_ms / 1000,
                            (options.timeout_ms % 1000) * 1000);
    client.set_write_timeout(options.timeout_ms / 1000,
                             (options.timeout_ms % 1000) * 1000);
  }

  cv::Mat post(const std::string& route, const nlohmann::json& request) {
    std::string body = request.dump();
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
      auto res = client.Post(route, body, "application/json");
      if (!res) {
        if (attempt == options.retries)
          throw BackendError("backend unreachable at " + options.endpoint + route +
                             ": " + httplib::to_string(res.error()));
        continue;
      }
      if (res->status != 200)
        throw BackendError("backend returned status " +
                           std::to_string(res->status) + " for " + route);
      std::vector<unsigned char> bytes(res->body.begin(), res->body.end());
      return decode_png(bytes);
    }
    throw BackendError("backend request failed: " + route);
  }
};

HttpBackend::HttpBackend(HttpBackendOptions options) {
  if (options.endpoint.empty())
    throw ConfigError("http backend requires an endpoint "
                      "(config or OUTGEN_BACKEND_ENDPOINT)");
  impl_ = std::make_unique<Impl>(std::move(options));
}

HttpBackend::~HttpBackend() = default;

cv::Mat HttpBackend::outpaint(const cv::Mat& canvas, const cv::Mat& mask,
                              const std::string& positive,
                              const std::string& negative, uint64_t noise_seed) {
  nlohmann::json request = {
      {"canvas", base64_encode(encode_png(canvas))},
      {"mask", base64_encode(encode_png(mask))},
      {"positive", positive},
      {"negative", negative},
      {"noise_seed", noise_seed},
      {"size", canvas.cols},
  };
  return impl_->post("/outpaint", request);
}

cv::Mat HttpBackend::text_to_image(const std::string& positive,
                                   const std::string& negative,
                                   uint64_t noise_seed, int size) {
  nlohmann::json request = {
      {"positive", positive},
      {"negative", negative},
      {"noise_seed", noise_seed},
      {"size", size},
  };
  return impl_->post("/text_to_image", request);
}

}  // namespace outgen
