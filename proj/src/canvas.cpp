#include "outgen/canvas.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "outgen/error.hpp"

namespace outgen {

ScaleBounds scale_bounds(const SeedRecord& seed, int canvas_size, double min_dim) {
  const double cw = seed.crop_width, ch = seed.crop_height;
  if (!(cw > 0 && ch > 0))
    throw ValidationError("scale_bounds: seed has empty crop");
  ScaleBounds bounds;
  bounds.s_max = std::min(canvas_size / cw, canvas_size / ch);
  bounds.s_min = min_dim * seed.buffer.buffer_factor / std::min(cw, ch);
  return bounds;
}

std::optional<PlacementSpec> sample_placement(const SeedRecord& seed,
                                              int canvas_size, RngStream& rng) {
  ScaleBounds bounds = scale_bounds(seed, canvas_size);
  if (bounds.s_min > bounds.s_max * (1 + 1e-12)) return std::nullopt;
  bounds.s_min = std::min(bounds.s_min, bounds.s_max);

  PlacementSpec spec;
  spec.canvas_size = canvas_size;
  spec.scale = rng.uniform(bounds.s_min, bounds.s_max);
  spec.x0 = rng.uniform(0.0, canvas_size - spec.scale * seed.crop_width);
  spec.y0 = rng.uniform(0.0, canvas_size - spec.scale * seed.crop_height);
  spec.channel_perm = static_cast<int>(rng.uniform_int(kChannelPerms.size()));
  return spec;
}

cv::Mat permute_channels(const cv::Mat& image, int perm) {
  if (image.channels() != 3)
    throw ValidationError("permute_channels: 3-channel raster required");
  if (perm < 0 || perm >= static_cast<int>(kChannelPerms.size()))
    throw ValidationError("permute_channels: permutation index out of range");
  const auto& p = kChannelPerms[perm];
  if (perm == 0) return image.clone();
  cv::Mat out(image.rows, image.cols, image.type());
  // output channel c <- input channel p[c]
  int from_to[6] = {p[0], 0, p[1], 1, p[2], 2};
  cv::mixChannels(&image, 1, &out, 1, from_to, 3);
  return out;
}

cv::Rect paste_rect(const PlacementSpec& placement, int crop_width,
                    int crop_height) {
  int sw = std::max(1, static_cast<int>(std::lround(placement.scale * crop_width)));
  int sh = std::max(1, static_cast<int>(std::lround(placement.scale * crop_height)));
  sw = std::min(sw, placement.canvas_size);
  sh = std::min(sh, placement.canvas_size);
  int x = static_cast<int>(std::lround(placement.x0));
  int y = static_cast<int>(std::lround(placement.y0));
  x = std::clamp(x, 0, placement.canvas_size - sw);
  y = std::clamp(y, 0, placement.canvas_size - sh);
  return {x, y, sw, sh};
}

void validate_placement(const SeedRecord& seed, const PlacementSpec& placement,
                        double min_dim) {
  constexpr double eps = 1e-6;
  if (placement.canvas_size < 1)
    throw ValidationError("placement: non-positive canvas size");
  if (placement.channel_perm < 0 ||
      placement.channel_perm >= static_cast<int>(kChannelPerms.size()))
    throw ValidationError("placement: channel permutation out of range");
  if (!(placement.scale > 0))
    throw ValidationError("placement: non-positive scale");
  const double sw = placement.scale * seed.crop_width;
  const double sh = placement.scale * seed.crop_height;
  if (placement.x0 < -eps || placement.y0 < -eps ||
      placement.x0 + sw > placement.canvas_size + eps ||
      placement.y0 + sh > placement.canvas_size + eps)
    throw ValidationError("placement: scaled crop does not fit on canvas");
  PixelBox inner = remove_buffer(seed.crop_width, seed.crop_height, seed.buffer);
  if (placement.scale * inner.width() < min_dim - eps ||
      placement.scale * inner.height() < min_dim - eps)
    throw ValidationError("placement: scaled inner box below minimum size");
}

cv::Mat render_mask(const PlacementSpec& placement, const BufferSpec& buffer,
                    int crop_width, int crop_height, double blur_sigma_fraction) {
  if (blur_sigma_fraction < 0)
    throw ValidationError("render_mask: negative blur fraction");
  const int n = placement.canvas_size;
  const cv::Rect rect = paste_rect(placement, crop_width, crop_height);

  cv::Mat mask(n, n, CV_32F, cv::Scalar(255.0f));
  mask(rect).setTo(0.0f);

  const PixelBox inner = remove_buffer(crop_width, crop_height, buffer);
  const double s = placement.scale;
  const double thickness[4] = {s * inner.x_min,
                               s * inner.y_min,
                               s * (crop_width - inner.x_max),
                               s * (crop_height - inner.y_max)};
  double mean_thick = (thickness[0] + thickness[1] + thickness[2] + thickness[3]) / 4;
  double sigma = blur_sigma_fraction * mean_thick;
  if (blur_sigma_fraction > 0 && sigma < 1e-9) sigma = 2.0;  // fully clamped buffer

  if (sigma > 0) {
    int k = 2 * static_cast<int>(std::ceil(3 * sigma)) + 1;
    cv::GaussianBlur(mask, mask, cv::Size(k, k), sigma, sigma,
                     cv::BORDER_REPLICATE);
  }

  // re-clamp: the object itself is never regenerated, and far field stays open
  const double ix0 = placement.x0 + s * inner.x_min;
  const double iy0 = placement.y0 + s * inner.y_min;
  const double ix1 = placement.x0 + s * inner.x_max;
  const double iy1 = placement.y0 + s * inner.y_max;
  const double dilation = 3 * sigma;
  const double dx0 = rect.x - dilation, dy0 = rect.y - dilation;
  const double dx1 = rect.x + rect.width + dilation;
  const double dy1 = rect.y + rect.height + dilation;

  for (int r = 0; r < n; ++r) {
    float* row = mask.ptr<float>(r);
    const double py = r + 0.5;
    for (int c = 0; c < n; ++c) {
      const double px = c + 0.5;
      if (px > ix0 && px < ix1 && py > iy0 && py < iy1)
        row[c] = 0.0f;
      else if (px < dx0 || px > dx1 || py < dy0 || py > dy1)
        row[c] = 255.0f;
    }
  }

  cv::Mat out;
  mask.convertTo(out, CV_8U);
  return out;
}

NormAnnotation derive_annotation(const SeedRecord& seed,
                                 const PlacementSpec& placement) {
  const PixelBox inner =
      remove_buffer(seed.crop_width, seed.crop_height, seed.buffer);
  const double s = placement.scale;
  const double n = placement.canvas_size;
  NormAnnotation a;
  a.class_id = seed.class_id;
  a.w = s * inner.width() / n;
  a.h = s * inner.height() / n;
  a.cx = (placement.x0 + s * (inner.x_min + inner.x_max) / 2) / n;
  a.cy = (placement.y0 + s * (inner.y_min + inner.y_max) / 2) / n;
  return a;
}

CanvasBundle compose_canvas(const SeedRecord& seed, const PlacementSpec& placement,
                            int fill_value, double blur_sigma_fraction) {
  validate_placement(seed, placement);
  if (seed.crop_image.empty() || seed.crop_image.channels() != 3)
    throw ValidationError("compose_canvas: seed crop must be a 3-channel raster");

  const cv::Rect rect = paste_rect(placement, seed.crop_width, seed.crop_height);
  cv::Mat canvas(placement.canvas_size, placement.canvas_size, CV_8UC3,
                 cv::Scalar::all(fill_value));

  cv::Mat permuted = permute_channels(seed.crop_image, placement.channel_perm);
  cv::Mat scaled;
  if (rect.width == seed.crop_width && rect.height == seed.crop_height)
    scaled = permuted;  // identity scale pastes pixels verbatim
  else
    cv::resize(permuted, scaled, cv::Size(rect.width, rect.height), 0, 0,
               cv::INTER_LINEAR);
  scaled.copyTo(canvas(rect));

  CanvasBundle bundle;
  bundle.canvas = canvas;
  bundle.mask = render_mask(placement, seed.buffer, seed.crop_width,
                            seed.crop_height, blur_sigma_fraction);
  bundle.annotation = derive_annotation(seed, placement);
  bundle.placement = placement;
  bundle.buffer = seed.buffer;
  bundle.crop_width = seed.crop_width;
  bundle.crop_height = seed.crop_height;
  bundle.seed_id = seed.seed_id;
  return bundle;
}

}  // namespace outgen
