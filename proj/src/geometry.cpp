#include "outgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "outgen/error.hpp"

namespace outgen {

bool PixelBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min >= 0 && y_min >= 0 && x_min < x_max &&
         y_min < y_max;
}

bool NormAnnotation::valid(double eps) const {
  if (!(std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) &&
        std::isfinite(h)))
    return false;
  if (!(w > 0 && w <= 1 + eps && h > 0 && h <= 1 + eps)) return false;
  return cx - w / 2 >= -eps && cx + w / 2 <= 1 + eps && cy - h / 2 >= -eps &&
         cy + h / 2 <= 1 + eps;
}

ClassRegistry::ClassRegistry(std::vector<ClassInfo> classes)
    : classes_(std::move(classes)) {
  for (size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].id != static_cast<int>(i))
      throw ConfigError("class registry ids must be contiguous from 0");
    for (size_t j = 0; j < i; ++j)
      if (classes_[j].name == classes_[i].name)
        throw ConfigError("duplicate class name: " + classes_[i].name);
  }
}

const ClassRegistry& ClassRegistry::standard() {
  static const ClassRegistry registry({
      {0, "COUPE", "Coupe, Convertible, Cabriolet, or other two-door passenger cars"},
      {1, "SEDAN", "Sedan, or other four-door passenger cars"},
      {2, "SUV", "SUV or Crossover"},
      {3, "MINIVAN", "Minivan or Wagon"},
      {4, "MINIBUS", "Minibus, Shuttles, or large passenger vans"},
      {5, "BUS", "City, Coach, Double-Decker, Articulated, or School Bus"},
      {6, "VAN", "Work, Camper, or Conversion Van"},
      {7, "PICKUP", "Regular, Crew Cab, or Extended Cab Pickup Truck"},
      {8, "TRUCK", "Single Unit, Trailer, Articulated, Dump, Tanker, or Mixer Truck"},
  });
  return registry;
}

bool ClassRegistry::contains(int id) const {
  return id >= 0 && id < static_cast<int>(classes_.size());
}

const ClassInfo& ClassRegistry::at(int id) const {
  if (!contains(id))
    throw ValidationError("class id " + std::to_string(id) + " not in registry");
  return classes_[id];
}

double iou(const PixelBox& a, const PixelBox& b) {
  if (!a.valid() || !b.valid())
    throw ValidationError("iou: degenerate or invalid box");
  double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

BufferedCrop buffered_crop(const PixelBox& detected, double image_width,
                           double image_height, double buffer_factor) {
  if (!detected.valid())
    throw ValidationError("buffered_crop: invalid detected box");
  if (detected.x_max > image_width || detected.y_max > image_height)
    throw ValidationError("buffered_crop: detected box outside image");
  if (!(buffer_factor > 1))
    throw ValidationError("buffered_crop: buffer_factor must be > 1");

  double mx = (buffer_factor - 1) / 2 * detected.width();
  double my = (buffer_factor - 1) / 2 * detected.height();
  PixelBox crop{std::max(0.0, detected.x_min - mx),
                std::max(0.0, detected.y_min - my),
                std::min(image_width, detected.x_max + mx),
                std::min(image_height, detected.y_max + my)};
  BufferSpec spec;
  spec.buffer_factor = buffer_factor;
  spec.left = (detected.x_min - crop.x_min) / detected.width();
  spec.top = (detected.y_min - crop.y_min) / detected.height();
  spec.right = (crop.x_max - detected.x_max) / detected.width();
  spec.bottom = (crop.y_max - detected.y_max) / detected.height();
  return {crop, spec};
}

PixelBox remove_buffer(double buffered_width, double buffered_height,
                       const BufferSpec& spec) {
  if (!(buffered_width > 0 && buffered_height > 0))
    throw ValidationError("remove_buffer: non-positive crop dimensions");
  if (spec.left < 0 || spec.top < 0 || spec.right < 0 || spec.bottom < 0)
    throw ValidationError("remove_buffer: negative buffer fraction");
  double inner_w = buffered_width / (1 + spec.left + spec.right);
  double inner_h = buffered_height / (1 + spec.top + spec.bottom);
  double x0 = spec.left * inner_w;
  double y0 = spec.top * inner_h;
  return {x0, y0, x0 + inner_w, y0 + inner_h};
}

std::string serialize_labels(const std::vector<NormAnnotation>& annotations) {
  std::string out;
  char line[128];
  for (const auto& a : annotations) {
    std::snprintf(line, sizeof(line), "%d %.6f %.6f %.6f %.6f\n", a.class_id,
                  a.cx, a.cy, a.w, a.h);
    out += line;
  }
  return out;
}

std::vector<NormAnnotation> parse_labels(const std::string& text,
                                         const ClassRegistry& registry) {
  std::vector<NormAnnotation> out;
  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    if (line.empty() && stream.eof()) break;
    std::istringstream fields(line);
    NormAnnotation a;
    std::string extra;
    if (!(fields >> a.class_id >> a.cx >> a.cy >> a.w >> a.h))
      throw ParseError("malformed label line", lineno);
    if (fields >> extra) throw ParseError("trailing tokens on label line", lineno);
    if (!registry.contains(a.class_id))
      throw ParseError("class id outside registry: " + std::to_string(a.class_id),
                       lineno);
    for (double v : {a.cx, a.cy, a.w, a.h})
      if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0))
        throw ParseError("label value outside [0,1]", lineno);
    out.push_back(a);
  }
  return out;
}

}  // namespace outgen
