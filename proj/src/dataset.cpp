#include "outgen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "outgen/error.hpp"
#include "outgen/util.hpp"

namespace outgen {

const char* split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

void SplitConfig::validate() const {
  if (!(train > 0 && val > 0 && test > 0))
    throw ConfigError("split fractions must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
}

std::array<int, 3> SplitAssignment::totals() const {
  std::array<int, 3> t = {0, 0, 0};
  for (const auto& [cls, counts] : class_counts)
    for (int i = 0; i < 3; ++i) t[i] += counts[i];
  return t;
}

Split SplitAssignment::of(const std::string& seed_id) const {
  auto it = by_seed.find(seed_id);
  if (it == by_seed.end())
    throw ValidationError("seed not in split assignment: " + seed_id);
  return it->second;
}

namespace {

// largest-remainder apportionment; ties and the tiny-class path follow the
// priority test > train > val
std::array<int, 3> apportion(int n, const SplitConfig& cfg) {
  constexpr std::array<Split, 3> priority = {Split::Test, Split::Train, Split::Val};
  std::array<int, 3> counts = {0, 0, 0};
  if (n < 3) {
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(priority[i])];
    return counts;
  }
  const std::array<double, 3> fractions = {cfg.train, cfg.val, cfg.test};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double target = n * fractions[i];
    counts[i] = static_cast<int>(std::floor(target));
    remainder[i] = target - counts[i];
    assigned += counts[i];
  }
  std::array<int, 3> order = {static_cast<int>(Split::Test),
                              static_cast<int>(Split::Train),
                              static_cast<int>(Split::Val)};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int i = 0; i < n - assigned; ++i) ++counts[order[i]];
  return counts;
}

}  // namespace

SplitAssignment stratified_split(const std::vector<SplitRecord>& records,
                                 const SplitConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (records.empty()) throw ValidationError("stratified_split: empty input");

  // collapse to unique seeds, complain about conflicting class labels
  std::map<std::string, int> seed_class;
  for (const auto& r : records) {
    auto [it, inserted] = seed_class.emplace(r.seed_id, r.class_id);
    if (!inserted && it->second != r.class_id)
      throw ValidationError("seed " + r.seed_id + " has conflicting class ids");
  }

  std::map<int, std::vector<std::string>> by_class;
  for (const auto& [seed, cls] : seed_class) by_class[cls].push_back(seed);

  SplitAssignment assignment;
  for (auto& [cls, seeds] : by_class) {
    std::sort(seeds.begin(), seeds.end());
    rng.shuffle(seeds);
    std::array<int, 3> counts = apportion(static_cast<int>(seeds.size()), cfg);
    assignment.class_counts[cls] = counts;
    size_t idx = 0;
    for (int split = 0; split < 3; ++split)
      for (int i = 0; i < counts[split]; ++i)
        assignment.by_seed[seeds[idx++]] = static_cast<Split>(split);
  }
  return assignment;
}

DistributionTable distribution_table(const SplitAssignment& assignment) {
  if (assignment.by_seed.empty())
    throw ValidationError("distribution_table: empty assignment");

  DistributionTable table;
  for (const auto& [cls, counts] : assignment.class_counts)
    if (cls != kBackgroundClassId) table.class_ids.push_back(cls);
  std::sort(table.class_ids.begin(), table.class_ids.end());
  if (assignment.class_counts.count(kBackgroundClassId))
    table.class_ids.push_back(kBackgroundClassId);

  table.sizes = assignment.totals();
  for (int split = 0; split < 3; ++split) {
    table.rows[split].resize(table.class_ids.size(), 0.0);
    if (table.sizes[split] == 0) continue;
    for (size_t c = 0; c < table.class_ids.size(); ++c) {
      int count = assignment.class_counts.at(table.class_ids[c])[split];
      table.rows[split][c] = 100.0 * count / table.sizes[split];
    }
  }
  return table;
}

std::string DistributionTable::to_text(const ClassRegistry& registry) const {
  std::ostringstream os;
  os << "split  size ";
  for (int cls : class_ids)
    os << " " << (cls == kBackgroundClassId ? std::string("background")
                                            : registry.at(cls).name);
  os << "\n";
  os.setf(std::ios::fixed);
  os.precision(1);
  for (int split = 0; split < 3; ++split) {
    os << split_name(static_cast<Split>(split)) << " " << sizes[split];
    for (double pct : rows[split]) os << " " << pct << "%";
    os << "\n";
  }
  return os.str();
}

DatasetLayout write_dataset(const std::vector<DatasetItem>& items,
                            const SplitAssignment& assignment,
                            const std::filesystem::path& root,
                            const ClassRegistry& registry) {
  std::set<std::string> stems;
  for (const auto& item : items)
    if (!stems.insert(item.stem).second)
      throw ValidationError("duplicate dataset stem: " + item.stem);

  DatasetLayout layout;
  layout.root = root;
  for (const char* sub : {"train", "val", "test"}) {
    std::filesystem::create_directories(root / "images" / sub);
    std::filesystem::create_directories(root / "labels" / sub);
  }

  for (const auto& item : items) {
    if (!std::filesystem::exists(item.image_path))
      throw IoError("dataset image missing: " + item.image_path.string());
    Split split = assignment.of(item.seed_id);
    const char* sub = split_name(split);
    std::filesystem::path image_dst =
        root / "images" / sub / (item.stem + item.image_path.extension().string());
    std::filesystem::copy_file(item.image_path, image_dst,
                               std::filesystem::copy_options::overwrite_existing);
    write_text_file(root / "labels" / sub / (item.stem + ".txt"), item.label_text);
    ++layout.counts[static_cast<int>(split)];
  }

  std::ostringstream os;
  os << "path: " << root.string() << "\n";
  os << "train: images/train\n";
  os << "val: images/val\n";
  os << "test: images/test\n";
  os << "names:\n";
  for (const auto& info : registry.classes())
    os << "  " << info.id << ": " << info.name << "\n";
  os << "counts:\n";
  for (int split = 0; split < 3; ++split)
    os << "  " << split_name(static_cast<Split>(split)) << ": "
       << layout.counts[split] << "\n";
  layout.descriptor = root / "dataset.yaml";
  write_text_file(layout.descriptor, os.str());
  return layout;
}

}  // namespace outgen
