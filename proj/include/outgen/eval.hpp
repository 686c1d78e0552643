#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "outgen/geometry.hpp"

namespace outgen {

struct GroundTruthBox {
  int class_id;
  PixelBox box;
};

struct PredictionBox {
  int class_id;
  PixelBox box;
  double confidence;
};

struct DetectionSample {
  std::string image_id;
  std::vector<GroundTruthBox> ground_truth;
  std::vector<PredictionBox> predictions;
};

// thresholds 0.50:0.05:0.95
const std::vector<double>& map_thresholds();

struct MatchResult {
  // per prediction of the class, in confidence-descending order
  std::vector<bool> tp;
  std::vector<double> confidence;
  int fn = 0;
};

// Greedy one-to-one matching: each prediction (confidence descending, ties
// by insertion order) claims the highest-IoU unmatched ground truth of the
// same class with IoU >= threshold.
MatchResult match_detections(const DetectionSample& sample, int class_id,
                             double iou_threshold);

struct ScoredFlag {
  double confidence;
  bool tp;
};

// All-points interpolation: area under the precision envelope over recall.
// 0 when there is ground truth but every prediction misses, or when there is
// no ground truth and any prediction exists; nullopt when there is nothing
// to evaluate at all.
std::optional<double> average_precision(std::vector<ScoredFlag> flags,
                                        int total_gt);

struct MapResult {
  double map50 = 0;
  double map50_95 = 0;
  std::map<int, double> per_class_ap50;
  std::map<int, double> per_class_ap50_95;
};

// AP per class per threshold; classes with zero ground truth across the
// sample set are excluded from the means.
MapResult compute_map(const std::vector<DetectionSample>& samples,
                      const std::vector<double>& thresholds = map_thresholds());

// 0.1 * mAP50 + 0.9 * mAP50-95
double fitness(double map50, double map50_95);

// Harmonic mean; 0 when both inputs are 0.
double f1(double precision, double recall);

struct ConfusionMatrix {
  int num_classes = 0;  // background occupies index num_classes
  std::vector<std::vector<int>> counts;  // [predicted][true]
  std::vector<std::vector<double>> normalized() const;  // columns sum to 1
  std::string to_text(const ClassRegistry& registry) const;
};

// Predictions below the confidence threshold are dropped; matched pairs (any
// class, IoU >= threshold, greedy by IoU) land in (pred, true); unmatched
// predictions in (pred, background); unmatched truths in (background, true).
ConfusionMatrix confusion_matrix(const std::vector<DetectionSample>& samples,
                                 int num_classes,
                                 double confidence_threshold = 0.25,
                                 double iou_threshold = 0.50);

struct MetricsReport {
  double precision = 0, recall = 0, f1_score = 0;
  double map50 = 0, map50_95 = 0, fitness_score = 0;
  // P/R are reported at the F1-maximizing confidence threshold (micro-
  // averaged over classes at IoU 0.5); the threshold itself is recorded.
  double operating_confidence = 0;
  std::map<int, double> per_class_ap50;
  ConfusionMatrix confusion;
  std::string to_text(const ClassRegistry& registry) const;
};

MetricsReport evaluate(const std::vector<DetectionSample>& samples,
                       int num_classes, double confusion_confidence = 0.25,
                       double confusion_iou = 0.50);

// Label format with a trailing confidence: "<class> <cx> <cy> <w> <h> <conf>".
std::vector<PredictionBox> parse_predictions(
    const std::string& text, double image_width, double image_height,
    const ClassRegistry& registry = ClassRegistry::standard());

// Denormalizes dataset labels to pixel boxes.
std::vector<GroundTruthBox> denormalize_labels(
    const std::vector<NormAnnotation>& annotations, double image_width,
    double image_height);

}  // namespace outgen
