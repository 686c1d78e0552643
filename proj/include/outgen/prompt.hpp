#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "outgen/rng.hpp"

namespace outgen {

struct PromptSpec {
  std::string positive;
  std::string negative;
  std::string location;  // empty for background prompts
  std::string time;      // empty for background prompts
  int class_id = -1;     // -1 for background prompts
};

// Vocabularies and per-class location subsets. Classes without an explicit
// subset fall back to the full location vocabulary. The shipped defaults map
// TRUCK-like classes to open-road locations and BUS-like classes to urban
// ones; everything is editable through the config file.
struct PromptConfig {
  std::vector<std::string> locations;
  std::map<int, std::vector<std::string>> class_locations;
  std::vector<std::string> times;
  std::vector<std::string> negative_base;
  std::vector<std::string> negative_extras;
  std::vector<std::string> backgrounds;
  bool include_extra_negatives = false;

  static PromptConfig defaults();
  static PromptConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  void validate() const;  // throws ConfigError

  const std::vector<std::string>& locations_for(int class_id) const;
};

// "A {location} during {time} with no vehicle."
std::string render_positive(const std::string& location, const std::string& time);

// Samples location from the class subset and time from the time vocabulary.
PromptSpec build_positive(int class_id, RngStream& rng, const PromptConfig& cfg);

// Comma-separated negative tokens, stable order.
std::string build_negative(bool include_extras, const PromptConfig& cfg);

// Vehicle-free scene description; negative always carries the base tokens.
PromptSpec build_background_prompt(RngStream& rng, const PromptConfig& cfg);

}  // namespace outgen
