#include "outgen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "outgen/error.hpp"

namespace outgen {

const std::vector<double>& map_thresholds() {
  static const std::vector<double> thresholds = [] {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
    return t;
  }();
  return thresholds;
}

namespace {

// indices of class predictions sorted by confidence descending, stable
std::vector<size_t> class_prediction_order(const DetectionSample& sample,
                                           int class_id) {
  std::vector<size_t> order;
  for (size_t i = 0; i < sample.predictions.size(); ++i)
    if (sample.predictions[i].class_id == class_id) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return sample.predictions[a].confidence > sample.predictions[b].confidence;
  });
  return order;
}

}  // namespace

MatchResult match_detections(const DetectionSample& sample, int class_id,
                             double iou_threshold) {
  std::vector<size_t> gt_ids;
  for (size_t i = 0; i < sample.ground_truth.size(); ++i)
    if (sample.ground_truth[i].class_id == class_id) gt_ids.push_back(i);

  MatchResult result;
  std::vector<bool> gt_used(gt_ids.size(), false);
  for (size_t pi : class_prediction_order(sample, class_id)) {
    const auto& pred = sample.predictions[pi];
    double best_iou = 0;
    int best = -1;
    for (size_t g = 0; g < gt_ids.size(); ++g) {
      if (gt_used[g]) continue;
      double ov = iou(pred.box, sample.ground_truth[gt_ids[g]].box);
      if (ov > best_iou) {
        best_iou = ov;
        best = static_cast<int>(g);
      }
    }
    bool hit = best >= 0 && best_iou >= iou_threshold;
    if (hit) gt_used[best] = true;
    result.tp.push_back(hit);
    result.confidence.push_back(pred.confidence);
  }
  result.fn = static_cast<int>(std::count(gt_used.begin(), gt_used.end(), false));
  return result;
}

std::optional<double> average_precision(std::vector<ScoredFlag> flags,
                                        int total_gt) {
  if (total_gt < 0) throw ValidationError("average_precision: negative gt count");
  if (total_gt == 0) return flags.empty() ? std::nullopt : std::optional(0.0);
  if (flags.empty()) return 0.0;

  std::stable_sort(flags.begin(), flags.end(),
                   [](const ScoredFlag& a, const ScoredFlag& b) {
                     return a.confidence > b.confidence;
                   });
  const size_t n = flags.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0, fp = 0;
  for (size_t i = 0; i < n; ++i) {
    flags[i].tp ? ++tp : ++fp;
    precision[i] = static_cast<double>(tp) / (tp + fp);
    recall[i] = static_cast<double>(tp) / total_gt;
  }
  for (size_t i = n - 1; i-- > 0;)
    precision[i] = std::max(precision[i], precision[i + 1]);

  double ap = 0, prev_recall = 0;
  for (size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

MapResult compute_map(const std::vector<DetectionSample>& samples,
                      const std::vector<double>& thresholds) {
  if (samples.empty()) throw ValidationError("compute_map: no samples");
  if (thresholds.empty()) throw ValidationError("compute_map: no thresholds");

  std::set<int> classes;
  for (const auto& s : samples)
    for (const auto& gt : s.ground_truth) classes.insert(gt.class_id);
  if (classes.empty())
    throw ValidationError("compute_map: no evaluable classes (no ground truth)");

  MapResult result;
  for (int cls : classes) {
    int total_gt = 0;
    for (const auto& s : samples)
      for (const auto& gt : s.ground_truth)
        if (gt.class_id == cls) ++total_gt;

    double threshold_sum = 0;
    for (double t : thresholds) {
      std::vector<ScoredFlag> flags;
      for (const auto& s : samples) {
        MatchResult m = match_detections(s, cls, t);
        for (size_t i = 0; i < m.tp.size(); ++i)
          flags.push_back({m.confidence[i], m.tp[i]});
      }
      double ap = average_precision(std::move(flags), total_gt).value_or(0.0);
      threshold_sum += ap;
      if (t == thresholds.front()) result.per_class_ap50[cls] = ap;
    }
    result.per_class_ap50_95[cls] = threshold_sum / thresholds.size();
  }

  for (const auto& [cls, ap] : result.per_class_ap50) result.map50 += ap;
  result.map50 /= result.per_class_ap50.size();
  for (const auto& [cls, ap] : result.per_class_ap50_95) result.map50_95 += ap;
  result.map50_95 /= result.per_class_ap50_95.size();
  return result;
}

double fitness(double map50, double map50_95) {
  return 0.1 * map50 + 0.9 * map50_95;
}

double f1(double precision, double recall) {
  if (precision + recall <= 0) return 0.0;
  return 2 * precision * recall / (precision + recall);
}

std::vector<std::vector<double>> ConfusionMatrix::normalized() const {
  const int n = num_classes + 1;
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (int col = 0; col < n; ++col) {
    long sum = 0;
    for (int row = 0; row < n; ++row) sum += counts[row][col];
    if (sum == 0) continue;
    for (int row = 0; row < n; ++row)
      out[row][col] = static_cast<double>(counts[row][col]) / sum;
  }
  return out;
}

std::string ConfusionMatrix::to_text(const ClassRegistry& registry) const {
  std::ostringstream os;
  auto label = [&](int i) {
    return i == num_classes ? std::string("background") : registry.at(i).name;
  };
  os << "confusion matrix (rows = predicted, columns = true)\n";
  os << "counts:\n";
  for (int r = 0; r <= num_classes; ++r) {
    os << "  " << label(r) << ":";
    for (int c = 0; c <= num_classes; ++c) os << " " << counts[r][c];
    os << "\n";
  }
  os << "column-normalized:\n";
  auto norm = normalized();
  os.setf(std::ios::fixed);
  os.precision(3);
  for (int r = 0; r <= num_classes; ++r) {
    os << "  " << label(r) << ":";
    for (int c = 0; c <= num_classes; ++c) os << " " << norm[r][c];
    os << "\n";
  }
  return os.str();
}

ConfusionMatrix confusion_matrix(const std::vector<DetectionSample>& samples,
                                 int num_classes, double confidence_threshold,
                                 double iou_threshold) {
  ConfusionMatrix m;
  m.num_classes = num_classes;
  m.counts.assign(num_classes + 1, std::vector<int>(num_classes + 1, 0));
  const int bg = num_classes;

  for (const auto& sample : samples) {
    std::vector<size_t> kept;
    for (size_t i = 0; i < sample.predictions.size(); ++i)
      if (sample.predictions[i].confidence >= confidence_threshold)
        kept.push_back(i);

    struct Pair {
      double iou;
      size_t pred, gt;
    };
    std::vector<Pair> pairs;
    for (size_t pi = 0; pi < kept.size(); ++pi) {
      for (size_t gi = 0; gi < sample.ground_truth.size(); ++gi) {
        double ov = iou(sample.predictions[kept[pi]].box,
                        sample.ground_truth[gi].box);
        if (ov >= iou_threshold) pairs.push_back({ov, pi, gi});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.pred != b.pred) return a.pred < b.pred;
      return a.gt < b.gt;
    });

    std::vector<bool> pred_used(kept.size(), false);
    std::vector<bool> gt_used(sample.ground_truth.size(), false);
    for (const auto& p : pairs) {
      if (pred_used[p.pred] || gt_used[p.gt]) continue;
      pred_used[p.pred] = true;
      gt_used[p.gt] = true;
      ++m.counts[sample.predictions[kept[p.pred]].class_id]
                [sample.ground_truth[p.gt].class_id];
    }
    for (size_t pi = 0; pi < kept.size(); ++pi)
      if (!pred_used[pi]) ++m.counts[sample.predictions[kept[pi]].class_id][bg];
    for (size_t gi = 0; gi < sample.ground_truth.size(); ++gi)
      if (!gt_used[gi]) ++m.counts[bg][sample.ground_truth[gi].class_id];
  }
  return m;
}

MetricsReport evaluate(const std::vector<DetectionSample>& samples,
                       int num_classes, double confusion_confidence,
                       double confusion_iou) {
  MetricsReport report;
  MapResult maps = compute_map(samples);
  report.map50 = maps.map50;
  report.map50_95 = maps.map50_95;
  report.per_class_ap50 = maps.per_class_ap50;
  report.fitness_score = fitness(maps.map50, maps.map50_95);

  // micro-averaged PR over all classes at IoU 0.5, swept over the achieved
  // confidences; the max-F1 operating point is what gets reported
  std::set<int> classes;
  for (const auto& s : samples)
    for (const auto& gt : s.ground_truth) classes.insert(gt.class_id);
  std::vector<ScoredFlag> flags;
  int total_gt = 0;
  for (int cls : classes) {
    for (const auto& s : samples) {
      MatchResult m = match_detections(s, cls, 0.5);
      for (size_t i = 0; i < m.tp.size(); ++i)
        flags.push_back({m.confidence[i], m.tp[i]});
    }
    for (const auto& s : samples)
      for (const auto& gt : s.ground_truth)
        if (gt.class_id == cls) ++total_gt;
  }
  std::stable_sort(flags.begin(), flags.end(),
                   [](const ScoredFlag& a, const ScoredFlag& b) {
                     return a.confidence > b.confidence;
                   });
  int tp = 0, fp = 0;
  double best_f1 = -1;
  for (size_t i = 0; i < flags.size(); ++i) {
    flags[i].tp ? ++tp : ++fp;
    // evaluate only at threshold boundaries (last index of each confidence)
    if (i + 1 < flags.size() && flags[i + 1].confidence == flags[i].confidence)
      continue;
    double p = static_cast<double>(tp) / (tp + fp);
    double r = total_gt > 0 ? static_cast<double>(tp) / total_gt : 0.0;
    double score = f1(p, r);
    if (score > best_f1) {
      best_f1 = score;
      report.precision = p;
      report.recall = r;
      report.f1_score = score;
      report.operating_confidence = flags[i].confidence;
    }
  }
  report.confusion = confusion_matrix(samples, num_classes, confusion_confidence,
                                      confusion_iou);
  return report;
}

std::string MetricsReport::to_text(const ClassRegistry& registry) const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "precision:  " << precision << "  (at confidence "
     << operating_confidence << ", max-F1 operating point)\n";
  os << "recall:     " << recall << "\n";
  os << "f1:         " << f1_score << "\n";
  os << "mAP50:      " << map50 << "\n";
  os << "mAP50-95:   " << map50_95 << "\n";
  os << "fitness:    " << fitness_score << "\n";
  os << "per-class AP50:\n";
  for (const auto& [cls, ap] : per_class_ap50)
    os << "  " << registry.at(cls).name << ": " << ap << "\n";
  os << confusion.to_text(registry);
  return os.str();
}

std::vector<PredictionBox> parse_predictions(const std::string& text,
                                             double image_width,
                                             double image_height,
                                             const ClassRegistry& registry) {
  std::vector<PredictionBox> out;
  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    int class_id;
    double cx, cy, w, h, conf;
    std::string extra;
    if (!(fields >> class_id >> cx >> cy >> w >> h >> conf))
      throw ParseError("malformed prediction line", lineno);
    if (fields >> extra)
      throw ParseError("trailing tokens on prediction line", lineno);
    if (!registry.contains(class_id))
      throw ParseError("class id outside registry", lineno);
    if (!(conf >= 0 && conf <= 1))
      throw ParseError("confidence outside [0,1]", lineno);
    PredictionBox p;
    p.class_id = class_id;
    p.confidence = conf;
    p.box = {(cx - w / 2) * image_width, (cy - h / 2) * image_height,
             (cx + w / 2) * image_width, (cy + h / 2) * image_height};
    out.push_back(p);
  }
  return out;
}

std::vector<GroundTruthBox> denormalize_labels(
    const std::vector<NormAnnotation>& annotations, double image_width,
    double image_height) {
  std::vector<GroundTruthBox> out;
  for (const auto& a : annotations) {
    GroundTruthBox gt;
    gt.class_id = a.class_id;
    gt.box = {(a.cx - a.w / 2) * image_width, (a.cy - a.h / 2) * image_height,
              (a.cx + a.w / 2) * image_width, (a.cy + a.h / 2) * image_height};
    out.push_back(gt);
  }
  return out;
}

}  // namespace outgen
