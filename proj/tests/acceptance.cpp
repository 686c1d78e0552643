// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Hermetic: no GPU, no network, mock backend only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "outgen/error.hpp"
#include "outgen/eval.hpp"
#include "outgen/pipeline.hpp"
#include "outgen/quality.hpp"

using namespace outgen;

namespace {

int failures = 0;
int checks = 0;
std::string detail;

void expect(bool ok, const std::string& what) {
  ++checks;
  if (!ok) {
    ++failures;
    if (detail.size() < 400) detail += "\n      failed: " + what;
  }
}

bool run_criterion(int number, const std::string& title,
                   const std::function<void()>& body) {
  failures = 0;
  checks = 0;
  detail.clear();
  auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    ++failures;
    detail += std::string("\n      exception: ") + e.what();
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  bool ok = failures == 0;
  std::printf("[%s] criterion %d: %s (%d checks, %lld ms)%s\n",
              ok ? "PASS" : "FAIL", number, title.c_str(), checks,
              static_cast<long long>(ms), detail.c_str());
  return ok;
}

// ---------------------------------------------------------------------------

void criterion_1_formula_reproduction() {
  // published (precision, recall) -> F1 and (mAP50, mAP50-95) -> fitness
  const double pr[6][3] = {
      {0.748, 0.817, 0.781}, {0.789, 0.815, 0.802}, {0.813, 0.791, 0.802},
      {0.859, 0.850, 0.854}, {0.793, 0.803, 0.798}, {0.874, 0.827, 0.850}};
  const double maps[6][3] = {
      {0.842, 0.786, 0.791}, {0.873, 0.817, 0.823}, {0.874, 0.813, 0.819},
      {0.902, 0.857, 0.862}, {0.853, 0.783, 0.790}, {0.910, 0.851, 0.857}};
  for (int i = 0; i < 6; ++i) {
    expect(std::abs(f1(pr[i][0], pr[i][1]) - pr[i][2]) <= 0.002,
           "f1 row " + std::to_string(i));
    expect(std::abs(fitness(maps[i][0], maps[i][1]) - maps[i][2]) <= 0.002,
           "fitness row " + std::to_string(i));
  }
}

std::vector<SplitRecord> table_population(int total) {
  const double mix[10] = {0.15, 0.19, 0.08, 0.04, 0.04,
                          0.20, 0.03, 0.04, 0.13, 0.10};
  std::vector<SplitRecord> records;
  int assigned = 0;
  for (int cls = 0; cls < 10; ++cls) {
    int count = cls == 9 ? total - assigned
                         : static_cast<int>(std::round(mix[cls] * total));
    assigned += count;
    int id = cls == 9 ? kBackgroundClassId : cls;
    for (int i = 0; i < count; ++i)
      records.push_back({"c" + std::to_string(cls) + "-" + std::to_string(i), id});
  }
  return records;
}

void criterion_2_split_reproduction() {
  const int total = 5664;
  auto records = table_population(total);
  expect(static_cast<int>(records.size()) == total, "population size");

  RngStream rng = RngStream::derive(2024, "acceptance-split");
  SplitAssignment assignment = stratified_split(records, {}, rng);
  auto totals = assignment.totals();
  // tolerance reading: 0.7% of the population (~40 records); the published
  // counts themselves deviate from exact 40/10/50 by a few records
  const double tolerance = 0.007 * total;
  expect(std::abs(totals[0] - 2269) <= tolerance, "train size");
  expect(std::abs(totals[1] - 562) <= tolerance, "val size");
  expect(std::abs(totals[2] - 2833) <= tolerance, "test size");

  DistributionTable table = distribution_table(assignment);
  for (size_t c = 0; c < table.class_ids.size(); ++c) {
    expect(std::abs(table.rows[0][c] - table.rows[2][c]) <= 1.0,
           "train/test percentage column " + std::to_string(c));
    expect(std::abs(table.rows[1][c] - table.rows[2][c]) <= 1.0,
           "val/test percentage column " + std::to_string(c));
  }

  // zero seed overlap on 1000 randomized reruns
  for (int run = 0; run < 1000; ++run) {
    RngStream stream = RngStream::derive(99, "split-rerun", run);
    SplitAssignment a = stratified_split(records, {}, stream);
    if (a.by_seed.size() != records.size()) {
      expect(false, "assignment incomplete on rerun " + std::to_string(run));
      return;
    }
    std::array<std::set<std::string>, 3> sets;
    for (const auto& [seed, split] : a.by_seed)
      sets[static_cast<int>(split)].insert(seed);
    size_t n = sets[0].size() + sets[1].size() + sets[2].size();
    if (n != records.size()) {
      expect(false, "split overlap detected on rerun " + std::to_string(run));
      return;
    }
  }
  expect(true, "1000 rerun overlap scan");
}

void criterion_3_geometry_oracle() {
  RngStream rng = RngStream::derive(3, "geometry");
  for (int i = 0; i < 10000; ++i) {
    double W = 100 + rng.uniform(0, 1900);
    double H = 100 + rng.uniform(0, 1900);
    // quarter of the cases hug a border so clamping kicks in
    double x0 = rng.uniform_int(4) == 0 ? 0.0 : rng.uniform(0, W - 40);
    double y0 = rng.uniform_int(4) == 0 ? 0.0 : rng.uniform(0, H - 40);
    double x1 = rng.uniform_int(4) == 0 ? W : x0 + rng.uniform(33, W - x0);
    double y1 = rng.uniform_int(4) == 0 ? H : y0 + rng.uniform(33, H - y0);
    PixelBox detected{x0, y0, x1, y1};

    auto [crop, spec] = buffered_crop(detected, W, H, 1.15);
    PixelBox inner = remove_buffer(crop.width(), crop.height(), spec);
    bool ok = std::abs(crop.x_min + inner.x_min - detected.x_min) < 0.5 &&
              std::abs(crop.y_min + inner.y_min - detected.y_min) < 0.5 &&
              std::abs(crop.x_min + inner.x_max - detected.x_max) < 0.5 &&
              std::abs(crop.y_min + inner.y_max - detected.y_max) < 0.5;
    if (!ok) {
      expect(false, "round-trip miss at case " + std::to_string(i));
      return;
    }
  }
  expect(true, "10^4 buffered-crop round-trips");

  // derive_annotation vs an independent recomputation from the detection
  RngStream arng = RngStream::derive(3, "annotation");
  int evaluated = 0;
  for (int i = 0; i < 2000; ++i) {
    double W = 600 + arng.uniform(0, 1000);
    double H = 600 + arng.uniform(0, 1000);
    double dx0 = arng.uniform(0, W - 200);
    double dy0 = arng.uniform(0, H - 200);
    PixelBox detected{dx0, dy0, dx0 + arng.uniform(64, 200),
                      dy0 + arng.uniform(64, 200)};
    auto [crop, spec] = buffered_crop(detected, W, H, 1.15);

    // rasterize the crop the way extraction does
    int rx0 = static_cast<int>(std::floor(crop.x_min));
    int ry0 = static_cast<int>(std::floor(crop.y_min));
    int rx1 = std::min(static_cast<int>(std::ceil(crop.x_max)),
                       static_cast<int>(W));
    int ry1 = std::min(static_cast<int>(std::ceil(crop.y_max)),
                       static_cast<int>(H));
    SeedRecord seed;
    seed.seed_id = "a" + std::to_string(i);
    seed.class_id = i % 9;
    seed.crop_width = rx1 - rx0;
    seed.crop_height = ry1 - ry0;
    seed.buffer.buffer_factor = 1.15;
    seed.buffer.left = (detected.x_min - rx0) / detected.width();
    seed.buffer.top = (detected.y_min - ry0) / detected.height();
    seed.buffer.right = (rx1 - detected.x_max) / detected.width();
    seed.buffer.bottom = (ry1 - detected.y_max) / detected.height();

    RngStream prng = RngStream::derive(17, "annotation-place", i);
    auto placement = sample_placement(seed, 512, prng);
    if (!placement) continue;
    ++evaluated;
    NormAnnotation a = derive_annotation(seed, *placement);

    // independent route: map the detection through the placement transform
    double s = placement->scale;
    double ex0 = placement->x0 + s * (detected.x_min - rx0);
    double ey0 = placement->y0 + s * (detected.y_min - ry0);
    double ex1 = ex0 + s * detected.width();
    double ey1 = ey0 + s * detected.height();
    double gx0 = (a.cx - a.w / 2) * 512, gy0 = (a.cy - a.h / 2) * 512;
    double gx1 = (a.cx + a.w / 2) * 512, gy1 = (a.cy + a.h / 2) * 512;
    bool ok = std::abs(gx0 - ex0) < 0.5 && std::abs(gy0 - ey0) < 0.5 &&
              std::abs(gx1 - ex1) < 0.5 && std::abs(gy1 - ey1) < 0.5;
    if (!ok) {
      expect(false, "annotation mismatch at case " + std::to_string(i));
      return;
    }
  }
  expect(evaluated >= 1500,
         "derive_annotation evaluated " + std::to_string(evaluated) + " cases");
}

void criterion_4_iou_and_consensus() {
  RngStream rng = RngStream::derive(4, "iou");
  for (int i = 0; i < 10000; ++i) {
    auto gen = [&] {
      double x0 = std::floor(rng.uniform(0, 200));
      double y0 = std::floor(rng.uniform(0, 200));
      return PixelBox{x0, y0, x0 + std::floor(rng.uniform(1, 80)),
                      y0 + std::floor(rng.uniform(1, 80))};
    };
    PixelBox a = gen(), b = gen();
    double tolerance = 2.0 / std::min(a.area(), b.area());
    if (std::abs(iou(a, b) - oracles::iou_rasterized(a, b)) > tolerance) {
      expect(false, "iou oracle miss at case " + std::to_string(i));
      return;
    }
  }
  expect(true, "10^4 iou raster oracle");

  ConsensusConfig cfg;
  RngStream vrng = RngStream::derive(4, "votes");
  for (int trial = 0; trial < 500; ++trial) {
    std::map<std::string, PixelBox> boxes;
    for (const auto& name : ensemble_order()) {
      double cx = vrng.uniform_int(2) ? 100 : 320;
      double jitter = vrng.uniform(0, 4);
      boxes[name] = {cx + jitter, 50, cx + 180 + jitter, 190};
    }
    auto tally = consensus_vote(boxes, cfg);
    int sum = 0;
    for (const auto& [name, votes] : tally) sum += votes;
    if (sum != 2 * oracles::count_vote_pairs(boxes, cfg.vote_iou_threshold)) {
      expect(false, "vote tally mismatch at trial " + std::to_string(trial));
      return;
    }
  }
  expect(true, "500 consensus fixtures vs all-pairs enumeration");

  // unanimous agreement keeps the published ensemble order, FCOS primary
  class Unanimous : public DetectorAdapter {
   public:
    explicit Unanimous(std::string name) : name_(std::move(name)) {}
    std::string name() const override { return name_; }
    std::vector<Detection> detect(const SourceImage&) override {
      return {{{40, 40, 280, 220}, 0.9, "car"}};
    }
   private:
    std::string name_;
  };
  std::vector<std::shared_ptr<DetectorAdapter>> ensemble;
  for (const auto& name : ensemble_order())
    ensemble.push_back(std::make_shared<Unanimous>(name));
  std::vector<SourceImage> calibration(3);
  for (auto& image : calibration)
    image.pixels = cv::Mat(300, 400, CV_8UC3, cv::Scalar(9, 9, 9));
  RankingResult ranking = rank_detectors(calibration, ensemble, cfg);
  expect(ranking.ranking == ensemble_order(), "unanimous ensemble order");
  expect(ranking.ranking.front() == "fcos", "FCOS primary");
}

void criterion_5_tv_properties() {
  cv::Mat constant(512, 512, CV_8UC3, cv::Scalar(77, 77, 77));
  expect(tv_loss(constant) == 0.0, "constant image");

  cv::Mat checker(32, 32, CV_8UC1);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) checker.at<uchar>(r, c) = (r + c) % 2 ? 255 : 0;
  expect(tv_loss(checker) == 255.0, "full-contrast checkerboard exact");

  RngStream rng = RngStream::derive(5, "tv");
  for (int i = 0; i < 100; ++i) {
    int w = 64 + static_cast<int>(rng.uniform_int(450));
    int h = 64 + static_cast<int>(rng.uniform_int(450));
    cv::Mat img(h, w, CV_8UC3);
    for (int r = 0; r < h; ++r) {
      uchar* row = img.ptr<uchar>(r);
      for (int c = 0; c < w * 3; ++c)
        row[c] = static_cast<uchar>(rng.uniform_int(256));
    }
    double got = tv_loss(img);
    double ref = oracles::tv_reference(img, 32);
    if (std::abs(got - ref) > 1e-6) {
      expect(false, "reference mismatch at image " + std::to_string(i));
      return;
    }
    if (i < 10) {
      std::vector<cv::Mat> channels;
      cv::split(img, channels);
      std::rotate(channels.begin(), channels.begin() + 1, channels.end());
      cv::Mat permuted, flipped;
      cv::merge(channels, permuted);
      if (std::abs(tv_loss(permuted) - got) > 1e-9) {
        expect(false, "channel permutation variance");
        return;
      }
      cv::flip(img, flipped, 0);
      if (std::abs(tv_loss(flipped) - got) > 1e-9) {
        expect(false, "vertical flip variance");
        return;
      }
      cv::flip(img, flipped, 1);
      if (std::abs(tv_loss(flipped) - got) > 1e-9) {
        expect(false, "horizontal flip variance");
        return;
      }
    }
  }
  expect(true, "100 random images vs double-loop reference and invariances");
}

void criterion_6_map_oracle() {
  // shrunk-box fixture: IoU exactly 0.6 against a 10x10 truth
  std::vector<DetectionSample> shrunk(1);
  shrunk[0].ground_truth = {{0, {0, 0, 10, 10}}};
  shrunk[0].predictions = {{0, {0, 0, 10, 6}, 0.9}};
  MapResult m = compute_map(shrunk);
  expect(std::abs(m.map50 - 1.0) <= 1e-9, "shrunk fixture mAP50");
  expect(std::abs(m.map50_95 - 0.3) <= 1e-9, "shrunk fixture mAP50-95");

  RngStream rng = RngStream::derive(6, "map");
  int evaluated = 0;
  for (int trial = 0; trial < 80; ++trial) {
    std::vector<DetectionSample> samples(2);
    std::set<int> classes;
    for (auto& sample : samples) {
      int n_gt = static_cast<int>(rng.uniform_int(4));
      for (int i = 0; i < n_gt; ++i) {
        double x0 = rng.uniform(0, 300), y0 = rng.uniform(0, 300);
        int cls = static_cast<int>(rng.uniform_int(3));
        classes.insert(cls);
        sample.ground_truth.push_back(
            {cls, {x0, y0, x0 + rng.uniform(20, 90), y0 + rng.uniform(20, 90)}});
      }
      int n_pred = static_cast<int>(rng.uniform_int(5));
      for (int i = 0; i < n_pred; ++i) {
        PixelBox base;
        if (!sample.ground_truth.empty() && rng.uniform() < 0.7) {
          const auto& g =
              sample.ground_truth[rng.pick_index(sample.ground_truth.size())].box;
          double dx = std::max(rng.uniform(-12, 12), -g.x_min);
          double dy = std::max(rng.uniform(-12, 12), -g.y_min);
          base = {g.x_min + dx, g.y_min + dy, g.x_max + dx, g.y_max + dy};
        } else {
          double x0 = rng.uniform(0, 300), y0 = rng.uniform(0, 300);
          base = {x0, y0, x0 + rng.uniform(20, 90), y0 + rng.uniform(20, 90)};
        }
        sample.predictions.push_back({static_cast<int>(rng.uniform_int(3)), base,
                                      std::round(rng.uniform() * 50) / 50});
      }
    }
    if (classes.empty()) continue;
    ++evaluated;

    MapResult got = compute_map(samples);
    // oracle: pool naive per-sample matches per class/threshold, then
    // integrate with the envelope-sweep AP
    double expected50 = 0, expected5095 = 0;
    for (int cls : classes) {
      int total_gt = 0;
      for (const auto& s : samples)
        for (const auto& g : s.ground_truth)
          if (g.class_id == cls) ++total_gt;
      double sum = 0;
      for (double threshold : map_thresholds()) {
        std::vector<ScoredFlag> flags;
        for (const auto& s : samples) {
          auto naive = oracles::match_reference(s, cls, threshold);
          struct Pred { double conf; };
          std::vector<double> confs;
          for (const auto& p : s.predictions)
            if (p.class_id == cls) confs.push_back(p.confidence);
          std::stable_sort(confs.begin(), confs.end(), std::greater<>());
          for (size_t i = 0; i < naive.tp.size(); ++i)
            flags.push_back({confs[i], naive.tp[i]});
        }
        double ap = oracles::ap_reference(flags, total_gt);
        sum += ap;
        if (threshold == 0.50) expected50 += ap;
      }
      expected5095 += sum / map_thresholds().size();
    }
    expected50 /= classes.size();
    expected5095 /= classes.size();
    if (std::abs(got.map50 - expected50) > 1e-9 ||
        std::abs(got.map50_95 - expected5095) > 1e-9) {
      expect(false, "mAP oracle mismatch at trial " + std::to_string(trial));
      return;
    }
  }
  expect(evaluated >= 50, "evaluated instance count " + std::to_string(evaluated));
}

void criterion_7_hermetic_end_to_end() {
  testsupport::TempDir dir("acceptance-e2e");
  auto env = fixtures::make_environment(dir.path(), 20);
  ExtractStageResult extraction = extract_stage(env.cfg);
  expect(extraction.accepted == 20, "20 fixture seeds extracted");

  RunReport report = run_pipeline(env.cfg.seed_manifest_path(), env.cfg);
  expect(report.vehicles_accepted == 20, "20 annotated images");
  expect(report.backgrounds_requested == 2, "background quota of 2 (10%)");
  expect(report.backgrounds_accepted == 2, "2 backgrounds accepted");

  // one label per image: vehicles carry one line, backgrounds zero
  auto rows = read_jsonl<OutpaintManifestRow>(env.cfg.outpaint_manifest_path());
  auto bg = read_jsonl<OutpaintManifestRow>(env.cfg.background_manifest_path());
  for (const auto& row : rows)
    expect(parse_labels(read_text_file(row.label_path)).size() == 1,
           "vehicle label " + row.item_id);
  for (const auto& row : bg)
    expect(read_text_file(row.label_path).empty(), "background label " + row.item_id);

  // preservation bit-identity on every accepted image
  auto compose_rows = read_jsonl<ComposeManifestRow>(env.cfg.compose_manifest_path());
  int preserved = 0;
  for (const auto& crow : compose_rows) {
    cv::Mat canvas = read_image(crow.canvas_path);
    cv::Mat mask = read_image(crow.mask_path, true);
    std::string image_path;
    for (const auto& orow : rows)
      if (orow.item_id == crow.item_id()) image_path = orow.image_path;
    cv::Mat outpainted = read_image(image_path);
    bool identical = true;
    for (int r = 0; r < canvas.rows && identical; ++r)
      for (int c = 0; c < canvas.cols; ++c)
        if (mask.at<uchar>(r, c) == 0 &&
            outpainted.at<cv::Vec3b>(r, c) != canvas.at<cv::Vec3b>(r, c)) {
          identical = false;
          break;
        }
    if (identical) ++preserved;
  }
  expect(preserved == 20, "preserved region bit-identity");

  // the gate log accounts for every backend call (count conservation)
  {
    PipelineConfig counted = env.cfg;
    counted.workdir = (dir.path() / "counted").string();
    std::filesystem::create_directories(counted.workdir_path());
    std::filesystem::copy_file(env.cfg.seed_manifest_path(),
                               counted.seed_manifest_path());
    compose_stage(counted);
    MockBackend backend(parse_mock_mode(counted.backend.mode),
                        counted.backend.noisy_count);
    GateConfig gate = make_gate(counted);
    OutpaintStageResult stage = outpaint_stage(counted, backend, gate, false);
    BackgroundStageResult bgs = background_stage(counted, backend, gate, -1);
    int logged = static_cast<int>(stage.attempts.size() + bgs.attempts.size());
    expect(logged == backend.calls(), "attempt log vs backend calls");
  }

  // rerun with the same global seed is byte-identical
  std::map<std::string, uint64_t> digests;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(env.cfg.workdir_path()))
    if (entry.is_regular_file())
      digests[entry.path().string()] = file_digest(entry.path());
  RunReport rerun = run_pipeline(env.cfg.seed_manifest_path(), env.cfg);
  expect(rerun.vehicles_accepted == 20, "rerun acceptance count");
  bool identical = true;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(env.cfg.workdir_path()))
    if (entry.is_regular_file() &&
        digests[entry.path().string()] != file_digest(entry.path()))
      identical = false;
  expect(identical, "rerun byte-identity");
}

void criterion_8_non_reproducibility_note() {
  // The published absolute metric levels and confusion improvements require
  // full-scale detector training on the released data; they are out of scope
  // here by design and covered only at formula/oracle level by criteria 1
  // and 6. Nothing to execute.
  expect(true, "documented exclusion");
}

}  // namespace

int main() {
  bool all = true;
  all &= run_criterion(1, "F1/fitness reproduce all twelve published cells",
                       criterion_1_formula_reproduction);
  all &= run_criterion(2, "stratified split reproduces the published sizes",
                       criterion_2_split_reproduction);
  all &= run_criterion(3, "buffer geometry and annotations invert exactly",
                       criterion_3_geometry_oracle);
  all &= run_criterion(4, "IoU and consensus match enumeration oracles",
                       criterion_4_iou_and_consensus);
  all &= run_criterion(5, "TV loss properties and reference equality",
                       criterion_5_tv_properties);
  all &= run_criterion(6, "mAP matches brute-force PR-curve oracles",
                       criterion_6_map_oracle);
  all &= run_criterion(7, "hermetic end-to-end run with the mock backend",
                       criterion_7_hermetic_end_to_end);
  all &= run_criterion(8,
                       "published absolute metrics are training-bound, covered "
                       "via criteria 1 and 6 only",
                       criterion_8_non_reproducibility_note);
  return all ? 0 : 1;
}
