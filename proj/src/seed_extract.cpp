#include "outgen/seed_extract.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "outgen/error.hpp"
#include "outgen/util.hpp"

namespace outgen {

const std::vector<std::string>& ensemble_order() {
  static const std::vector<std::string> order = {"fcos", "retinanet", "ssd",
                                                 "maskrcnn", "fasterrcnn"};
  return order;
}

const std::vector<std::string>& default_vehicle_classes() {
  static const std::vector<std::string> classes = {"car", "bus", "truck"};
  return classes;
}

std::optional<PixelBox> largest_box(
    const std::vector<Detection>& detections,
    const std::vector<std::string>& vehicle_classes) {
  std::optional<PixelBox> best;
  for (const auto& det : detections) {
    if (std::find(vehicle_classes.begin(), vehicle_classes.end(),
                  det.coarse_class) == vehicle_classes.end())
      continue;
    if (!best) {
      best = det.box;
      continue;
    }
    double a = det.box.area(), b = best->area();
    if (a > b ||
        (a == b && (det.box.y_min < best->y_min ||
                    (det.box.y_min == best->y_min && det.box.x_min < best->x_min))))
      best = det.box;
  }
  return best;
}

std::map<std::string, int> consensus_vote(
    const std::map<std::string, PixelBox>& per_model_boxes,
    const ConsensusConfig& cfg) {
  if (!(cfg.vote_iou_threshold > 0 && cfg.vote_iou_threshold <= 1))
    throw ValidationError("consensus_vote: threshold must be in (0,1]");
  std::map<std::string, int> tally;
  for (const auto& [name, box] : per_model_boxes) tally[name] = 0;
  for (auto a = per_model_boxes.begin(); a != per_model_boxes.end(); ++a) {
    for (auto b = std::next(a); b != per_model_boxes.end(); ++b) {
      if (iou(a->second, b->second) >= cfg.vote_iou_threshold) {
        ++tally[a->first];
        ++tally[b->first];
      }
    }
  }
  return tally;
}

RankingResult rank_detectors(
    const std::vector<SourceImage>& calibration_images,
    const std::vector<std::shared_ptr<DetectorAdapter>>& ensemble,
    const ConsensusConfig& cfg) {
  if (calibration_images.empty())
    throw ValidationError("rank_detectors: empty calibration set");

  RankingResult result;
  for (const auto& adapter : ensemble) result.votes[adapter->name()] = 0;

  for (const auto& image : calibration_images) {
    std::map<std::string, PixelBox> boxes;
    for (const auto& adapter : ensemble) {
      try {
        auto box = largest_box(adapter->detect(image));
        if (box) boxes[adapter->name()] = *box;
      } catch (const std::exception& e) {
        result.warnings.push_back(adapter->name() + " failed on " + image.path +
                                  ": " + e.what());
      }
    }
    for (const auto& [name, count] : consensus_vote(boxes, cfg))
      result.votes[name] += count;
  }

  result.ranking = cfg.ensemble;
  auto position = [&](const std::string& name) {
    auto it = std::find(cfg.ensemble.begin(), cfg.ensemble.end(), name);
    return std::distance(cfg.ensemble.begin(), it);
  };
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [&](const std::string& a, const std::string& b) {
                     int va = result.votes.count(a) ? result.votes.at(a) : 0;
                     int vb = result.votes.count(b) ? result.votes.at(b) : 0;
                     if (va != vb) return va > vb;
                     return position(a) < position(b);
                   });
  return result;
}

ExtractOutcome extract_seed(
    const SourceImage& image, const std::string& seed_id, int class_id,
    const std::vector<std::shared_ptr<DetectorAdapter>>& ranked_detectors,
    double min_dim, double buffer_factor,
    const std::vector<std::string>& vehicle_classes) {
  if (image.pixels.empty()) throw IoError("extract_seed: unreadable image");
  if (!ClassRegistry::standard().contains(class_id))
    throw ValidationError("extract_seed: class id not in registry");

  std::optional<PixelBox> detected;
  for (const auto& adapter : ranked_detectors) {
    try {
      detected = largest_box(adapter->detect(image), vehicle_classes);
    } catch (const std::exception&) {
      continue;  // fall through to the next detector in rank order
    }
    if (detected) break;
  }
  if (!detected) return {std::nullopt, "undetected"};
  if (detected->width() < min_dim || detected->height() < min_dim)
    return {std::nullopt, "below min_dim"};

  const double W = image.pixels.cols, H = image.pixels.rows;
  PixelBox clipped{std::clamp(detected->x_min, 0.0, W),
                   std::clamp(detected->y_min, 0.0, H),
                   std::clamp(detected->x_max, 0.0, W),
                   std::clamp(detected->y_max, 0.0, H)};
  auto [crop, spec] = buffered_crop(clipped, W, H, buffer_factor);

  // Rasterize to the integer hull and recompute the per-side fractions
  // against it so the detected box stays exactly recoverable.
  int x0 = static_cast<int>(std::floor(crop.x_min));
  int y0 = static_cast<int>(std::floor(crop.y_min));
  int x1 = std::min(static_cast<int>(std::ceil(crop.x_max)), image.pixels.cols);
  int y1 = std::min(static_cast<int>(std::ceil(crop.y_max)), image.pixels.rows);

  SeedRecord seed;
  seed.seed_id = seed_id;
  seed.class_id = class_id;
  seed.source_path = image.path;
  seed.crop_box = {static_cast<double>(x0), static_cast<double>(y0),
                   static_cast<double>(x1), static_cast<double>(y1)};
  seed.buffer.buffer_factor = buffer_factor;
  seed.buffer.left = (clipped.x_min - x0) / clipped.width();
  seed.buffer.top = (clipped.y_min - y0) / clipped.height();
  seed.buffer.right = (x1 - clipped.x_max) / clipped.width();
  seed.buffer.bottom = (y1 - clipped.y_max) / clipped.height();
  seed.crop_image =
      image.pixels(cv::Rect(x0, y0, x1 - x0, y1 - y0)).clone();
  seed.crop_width = x1 - x0;
  seed.crop_height = y1 - y0;
  return {seed, ""};
}

FixtureDetector::FixtureDetector(std::string model_name)
    : model_name_(std::move(model_name)) {}

std::vector<Detection> FixtureDetector::detect(const SourceImage& image) {
  const std::string sidecar = image.path + ".boxes.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("fixture sidecar parse error in " + sidecar + ": " + e.what());
  }
  if (!j.contains(model_name_)) return {};
  const auto& entry = j[model_name_];
  if (entry.is_string() && entry.get<std::string>() == "fail")
    throw BackendError("fixture detector '" + model_name_ + "' set to fail");

  std::vector<Detection> detections;
  for (const auto& item : entry) {
    Detection det;
    const auto& box = item.at("box");
    det.box = {box.at(0).get<double>(), box.at(1).get<double>(),
               box.at(2).get<double>(), box.at(3).get<double>()};
    det.confidence = item.value("confidence", 1.0);
    det.coarse_class = item.value("class", "car");
    detections.push_back(det);
  }
  return detections;
}

std::vector<std::shared_ptr<DetectorAdapter>> fixture_ensemble() {
  std::vector<std::shared_ptr<DetectorAdapter>> adapters;
  for (const auto& name : ensemble_order())
    adapters.push_back(std::make_shared<FixtureDetector>(name));
  return adapters;
}

}  // namespace outgen
