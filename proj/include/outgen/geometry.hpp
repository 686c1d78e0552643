#pragma once

#include <string>
#include <vector>

namespace outgen {

// Axis-aligned box in absolute pixel coordinates, origin top-left.
// Coordinates are continuous; rasterization happens only at image I/O.
struct PixelBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const;

  bool operator==(const PixelBox&) const = default;
};

// Box center and size normalized by canvas dimensions.
struct NormAnnotation {
  int class_id = 0;
  double cx = 0, cy = 0, w = 0, h = 0;

  bool valid(double eps = 1e-9) const;

  bool operator==(const NormAnnotation&) const = default;
};

// Per-side buffer fractions actually applied after image-border clamping.
// Fractions are relative to the inner (detected) box dimensions so the inner
// box stays exactly recoverable from the crop: crop_w = inner_w * (1+l+r).
struct BufferSpec {
  double buffer_factor = 1.15;
  double left = 0.075, top = 0.075, right = 0.075, bottom = 0.075;

  bool operator==(const BufferSpec&) const = default;
};

struct ClassInfo {
  int id;
  std::string name;
  std::string subcategories;
};

// Fixed vehicle taxonomy, ids contiguous from 0.
class ClassRegistry {
 public:
  explicit ClassRegistry(std::vector<ClassInfo> classes);

  // The nine-class registry COUPE..TRUCK.
  static const ClassRegistry& standard();

  const std::vector<ClassInfo>& classes() const { return classes_; }
  bool contains(int id) const;
  const ClassInfo& at(int id) const;
  int size() const { return static_cast<int>(classes_.size()); }

 private:
  std::vector<ClassInfo> classes_;
};

// Intersection over union of two valid boxes; 0 when disjoint.
double iou(const PixelBox& a, const PixelBox& b);

struct BufferedCrop {
  PixelBox crop;
  BufferSpec spec;
};

// Expands `detected` by (buffer_factor-1)/2 of its width/height per side,
// clamped to the image. The spec records per-side fractions actually
// achieved, so fully clamped sides come back as fraction 0, never an error.
BufferedCrop buffered_crop(const PixelBox& detected, double image_width,
                           double image_height, double buffer_factor = 1.15);

// Inner object box inside a buffered crop, relative to the crop origin.
PixelBox remove_buffer(double buffered_width, double buffered_height,
                       const BufferSpec& spec);

// One line per object: "<class_id> <cx> <cy> <w> <h>", six decimals,
// newline-terminated. Empty list -> empty text (background convention).
std::string serialize_labels(const std::vector<NormAnnotation>& annotations);

// Inverse of serialize_labels; throws ParseError with the offending line.
std::vector<NormAnnotation> parse_labels(
    const std::string& text,
    const ClassRegistry& registry = ClassRegistry::standard());

}  // namespace outgen
