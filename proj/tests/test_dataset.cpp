#include <doctest.h>

#include <cmath>
#include <set>

#include "testsupport.hpp"
#include "outgen/dataset.hpp"
#include "outgen/error.hpp"
#include "outgen/util.hpp"

using namespace outgen;

namespace {

std::vector<SplitRecord> make_class(int class_id, int count, int offset = 0) {
  std::vector<SplitRecord> records;
  for (int i = 0; i < count; ++i)
    records.push_back({"c" + std::to_string(class_id) + "-s" +
                           std::to_string(offset + i),
                       class_id});
  return records;
}

// per-class population matching the published per-split percentages:
// 15/19/8/4/4/20/3/4/13% for classes 0..8 plus 10% background
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
    auto chunk = make_class(id, count);
    records.insert(records.end(), chunk.begin(), chunk.end());
  }
  return records;
}

}  // namespace

TEST_CASE("exact fractions split cleanly") {
  RngStream rng(1);
  auto assignment = stratified_split(make_class(0, 10), {}, rng);
  auto counts = assignment.class_counts.at(0);
  CHECK(counts[0] == 4);  // train
  CHECK(counts[1] == 1);  // val
  CHECK(counts[2] == 5);  // test
}

TEST_CASE("stratification is independent per class") {
  auto records = make_class(0, 10);
  auto more = make_class(1, 10);
  records.insert(records.end(), more.begin(), more.end());
  RngStream rng(2);
  auto assignment = stratified_split(records, {}, rng);
  for (int cls : {0, 1}) {
    auto counts = assignment.class_counts.at(cls);
    CHECK(counts[0] == 4);
    CHECK(counts[1] == 1);
    CHECK(counts[2] == 5);
  }
}

TEST_CASE("tiny classes assign by priority test > train > val") {
  RngStream rng(3);
  auto one = stratified_split(make_class(0, 1), {}, rng);
  CHECK(one.class_counts.at(0) == std::array<int, 3>{0, 0, 1});
  auto two = stratified_split(make_class(0, 2), {}, rng);
  CHECK(two.class_counts.at(0) == std::array<int, 3>{1, 0, 1});
}

TEST_CASE("largest-remainder keeps every class within one of its target") {
  RngStream rng(4);
  SplitConfig cfg;
  for (int n : {3, 7, 11, 23, 57, 100, 849}) {
    auto assignment = stratified_split(make_class(0, n), cfg, rng);
    auto counts = assignment.class_counts.at(0);
    CHECK(std::abs(counts[0] - n * cfg.train) < 1.0);
    CHECK(std::abs(counts[1] - n * cfg.val) < 1.0);
    CHECK(std::abs(counts[2] - n * cfg.test) < 1.0);
    CHECK(counts[0] + counts[1] + counts[2] == n);
  }
}

TEST_CASE("splits are leak-free and deterministic") {
  auto records = table_population(1000);
  RngStream rng = RngStream::derive(7, "split");
  auto a = stratified_split(records, {}, rng);
  RngStream rng2 = RngStream::derive(7, "split");
  auto b = stratified_split(records, {}, rng2);
  CHECK(a.by_seed == b.by_seed);

  std::set<std::string> seen;
  for (const auto& [seed, split] : a.by_seed) CHECK(seen.insert(seed).second);
  CHECK(a.by_seed.size() == records.size());
}

TEST_CASE("input validation") {
  RngStream rng(5);
  CHECK_THROWS_AS(stratified_split({}, {}, rng), ValidationError);
  SplitConfig bad;
  bad.train = 0.5;
  CHECK_THROWS_AS(stratified_split(make_class(0, 5), bad, rng), ConfigError);
  // one seed with two classes is a corrupt manifest
  std::vector<SplitRecord> conflict = {{"s1", 0}, {"s1", 1}};
  CHECK_THROWS_AS(stratified_split(conflict, {}, rng), ValidationError);
}

TEST_CASE("distribution table rows mirror the population mix") {
  auto records = table_population(5664);
  RngStream rng = RngStream::derive(11, "table");
  auto assignment = stratified_split(records, {}, rng);
  DistributionTable table = distribution_table(assignment);

  REQUIRE(table.class_ids.size() == 10);
  CHECK(table.class_ids.back() == kBackgroundClassId);

  const double expected[10] = {15, 19, 8, 4, 4, 20, 3, 4, 13, 10};
  for (int split = 0; split < 3; ++split) {
    double row_sum = 0;
    for (size_t c = 0; c < 10; ++c) {
      CHECK(std::abs(table.rows[split][c] - expected[c]) <= 1.0);
      row_sum += table.rows[split][c];
    }
    CHECK(row_sum == doctest::Approx(100.0).epsilon(1e-9));
  }

  // rows are near-identical across splits for well-populated classes
  for (size_t c = 0; c < 10; ++c) {
    CHECK(std::abs(table.rows[0][c] - table.rows[2][c]) <= 1.0);
    CHECK(std::abs(table.rows[1][c] - table.rows[2][c]) <= 1.0);
  }
}

TEST_CASE("distribution table single-class edge") {
  RngStream rng(6);
  auto assignment = stratified_split(make_class(4, 30), {}, rng);
  DistributionTable table = distribution_table(assignment);
  REQUIRE(table.class_ids == std::vector<int>{4});
  for (int split = 0; split < 3; ++split)
    CHECK(table.rows[split][0] == doctest::Approx(100.0));
}

TEST_CASE("write_dataset lays out the tree with matching stems") {
  testsupport::TempDir dir("dataset");
  cv::Mat img(32, 32, CV_8UC3, cv::Scalar(9, 9, 9));
  std::vector<DatasetItem> items;
  std::vector<SplitRecord> records;
  for (int i = 0; i < 3; ++i) {
    std::string id = "seed-" + std::to_string(i);
    auto path = dir.path() / (id + ".png");
    write_image(path, img);
    items.push_back({id + "_0", id, path, "0 0.5 0.5 0.2 0.2\n"});
    records.push_back({id, 0});
  }
  RngStream rng(8);
  auto assignment = stratified_split(records, {}, rng);
  auto root = dir.path() / "out";
  DatasetLayout layout = write_dataset(items, assignment, root);

  int files = 0;
  for (const char* sub : {"train", "val", "test"}) {
    for (const auto& entry :
         std::filesystem::directory_iterator(root / "images" / sub)) {
      ++files;
      auto stem = entry.path().stem().string();
      CHECK(std::filesystem::exists(root / "labels" / sub / (stem + ".txt")));
    }
  }
  CHECK(files == 3);
  CHECK(layout.counts[0] + layout.counts[1] + layout.counts[2] == 3);

  std::string descriptor = read_text_file(layout.descriptor);
  CHECK(descriptor.find("0: COUPE") != std::string::npos);
  CHECK(descriptor.find("8: TRUCK") != std::string::npos);
  CHECK(descriptor.find("train: images/train") != std::string::npos);

  // rerun is idempotent
  DatasetLayout again = write_dataset(items, assignment, root);
  CHECK(read_text_file(again.descriptor) == descriptor);

  // stem collision and missing assignment are hard errors
  auto duplicated = items;
  duplicated.push_back(items[0]);
  CHECK_THROWS_AS(write_dataset(duplicated, assignment, root), ValidationError);
  std::vector<DatasetItem> orphan = {{"orphan_0", "missing-seed",
                                      items[0].image_path, ""}};
  CHECK_THROWS_AS(write_dataset(orphan, assignment, root), ValidationError);
}
