#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "outgen/geometry.hpp"
#include "outgen/rng.hpp"

namespace outgen {

// Backgrounds are tracked as their own stratum in splits and tables.
inline constexpr int kBackgroundClassId = -1;

enum class Split { Train = 0, Val = 1, Test = 2 };
const char* split_name(Split split);

struct SplitConfig {
  double train = 0.40, val = 0.10, test = 0.50;
  void validate() const;  // fractions positive, sum to 1 within 1e-9
};

struct SplitRecord {
  std::string seed_id;
  int class_id;  // kBackgroundClassId for background items
};

struct SplitAssignment {
  std::map<std::string, Split> by_seed;
  std::map<int, std::array<int, 3>> class_counts;  // per class, per split

  std::array<int, 3> totals() const;
  Split of(const std::string& seed_id) const;
};

// Within each class, seeds are shuffled deterministically and partitioned by
// the fractions with largest-remainder rounding; classes with < 3 seeds
// assign by priority test > train > val. Every image generated from a seed
// inherits the seed's split, which is what makes the dataset leak-free.
SplitAssignment stratified_split(const std::vector<SplitRecord>& records,
                                 const SplitConfig& cfg, RngStream& rng);

struct DistributionTable {
  std::vector<int> class_ids;                   // column order
  std::array<std::vector<double>, 3> rows;      // percentages per split
  std::array<int, 3> sizes;
  std::string to_text(const ClassRegistry& registry) const;
};

// Per-split per-class percentage rows; each row sums to 100 (up to fp).
DistributionTable distribution_table(const SplitAssignment& assignment);

struct DatasetItem {
  std::string stem;        // image/label file stem, unique across the dataset
  std::string seed_id;     // split unit this item inherits from
  std::filesystem::path image_path;  // source raster to copy in
  std::string label_text;  // serialized annotations ("" for backgrounds)
};

struct DatasetLayout {
  std::filesystem::path root;
  std::filesystem::path descriptor;
  std::array<int, 3> counts = {0, 0, 0};
};

// root/{images,labels}/{train,val,test}/<stem>.{png,txt} plus a descriptor
// listing class names in registry order, split paths, and counts.
DatasetLayout write_dataset(const std::vector<DatasetItem>& items,
                            const SplitAssignment& assignment,
                            const std::filesystem::path& root,
                            const ClassRegistry& registry = ClassRegistry::standard());

}  // namespace outgen
