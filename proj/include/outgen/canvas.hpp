#pragma once

#include <array>
#include <optional>
#include <string>

#include <opencv2/core.hpp>

#include "outgen/geometry.hpp"
#include "outgen/rng.hpp"
#include "outgen/seed_extract.hpp"

namespace outgen {

// The six permutations of (B,G,R) channel indices, lexicographic order.
inline constexpr std::array<std::array<int, 3>, 6> kChannelPerms = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

struct PlacementSpec {
  int canvas_size = 512;
  double scale = 1.0;
  double x0 = 0.0, y0 = 0.0;  // top-left of the scaled crop on canvas
  int channel_perm = 0;       // index into kChannelPerms

  bool operator==(const PlacementSpec&) const = default;
};

struct CanvasBundle {
  cv::Mat canvas;  // 8UC3, seed pasted over neutral fill
  cv::Mat mask;    // 8UC1, 255 = region to generate, 0 = preserve
  NormAnnotation annotation;
  PlacementSpec placement;
  BufferSpec buffer;
  int crop_width = 0, crop_height = 0;
  std::string seed_id;
};

// Legal scale interval for a seed on a canvas: fits entirely, and the scaled
// inner box stays at least min_dim pixels in both dimensions.
struct ScaleBounds {
  double s_min = 0, s_max = 0;
  bool feasible() const { return s_min <= s_max; }
};
ScaleBounds scale_bounds(const SeedRecord& seed, int canvas_size,
                         double min_dim = 32.0);

// Uniform over the legal set: scale in [s_min, s_max], top-left over every
// position keeping the scaled crop on canvas, channel permutation over all
// six. Deterministic for a fixed stream. nullopt = unplaceable seed.
std::optional<PlacementSpec> sample_placement(const SeedRecord& seed,
                                              int canvas_size, RngStream& rng);

// Output channel c takes input channel kChannelPerms[perm][c]; 3-channel only.
cv::Mat permute_channels(const cv::Mat& image, int perm);

// Integer pixel rectangle actually covered by the pasted, scaled crop.
cv::Rect paste_rect(const PlacementSpec& placement, int crop_width,
                    int crop_height);

// Throws ValidationError when the placement is illegal for the seed.
void validate_placement(const SeedRecord& seed, const PlacementSpec& placement,
                        double min_dim = 32.0);

// Binary mask (255 outside the scaled buffered rectangle) blurred with a
// Gaussian of sigma = blur_sigma_fraction * scaled mean buffer thickness,
// then re-clamped: exactly 0 strictly inside the scaled inner object box,
// exactly 255 outside the buffered rectangle dilated by 3 sigma.
cv::Mat render_mask(const PlacementSpec& placement, const BufferSpec& buffer,
                    int crop_width, int crop_height,
                    double blur_sigma_fraction = 0.5);

// Inner box from remove_buffer, scaled and offset by the placement,
// normalized by the canvas size.
NormAnnotation derive_annotation(const SeedRecord& seed,
                                 const PlacementSpec& placement);

// Neutral fill everywhere except the pasted, bilinearly rescaled,
// channel-permuted seed; bundles the mask and derived annotation.
CanvasBundle compose_canvas(const SeedRecord& seed, const PlacementSpec& placement,
                            int fill_value = 128,
                            double blur_sigma_fraction = 0.5);

}  // namespace outgen
