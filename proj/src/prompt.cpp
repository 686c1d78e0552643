#include "outgen/prompt.hpp"

#include <json.hpp>

#include "outgen/error.hpp"
#include "outgen/geometry.hpp"
#include "outgen/util.hpp"

namespace outgen {

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ", ";
    out += t;
  }
  return out;
}

}  // namespace

PromptConfig PromptConfig::defaults() {
  PromptConfig cfg;
  cfg.locations = {"highway", "road", "street", "downtown", "plaza"};
  // BUS/MINIBUS keep to urban locations, TRUCK/VAN to open-road ones;
  // the remaining classes draw from the full vocabulary.
  cfg.class_locations[4] = {"street", "downtown", "plaza"};
  cfg.class_locations[5] = {"street", "downtown", "plaza"};
  cfg.class_locations[6] = {"highway", "road", "street"};
  cfg.class_locations[8] = {"highway", "road", "street"};
  cfg.times = {"spring",        "summer",       "fall",
               "winter",        "a sunny day",  "a cloudy day",
               "a rainy day",   "evening",      "sunset",
               "sunrise"};
  cfg.negative_base = {"traffic", "train", "car", "truck", "bus", "van"};
  cfg.negative_extras = {"billboard", "text", "advertisement"};
  cfg.backgrounds = {
      "An empty city street at dawn",
      "A quiet suburban road lined with trees",
      "A downtown plaza on a rainy evening",
      "An empty highway at sunset",
      "A park promenade on a sunny day",
      "A cobblestone alley in the old town at dusk",
      "An empty parking lot under an overcast sky",
      "A riverside walkway in autumn",
  };
  return cfg;
}

PromptConfig PromptConfig::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("prompt config parse error: " + std::string(e.what()));
  }
  PromptConfig cfg = defaults();
  try {
    if (j.contains("locations")) cfg.locations = j["locations"].get<std::vector<std::string>>();
    if (j.contains("times")) cfg.times = j["times"].get<std::vector<std::string>>();
    if (j.contains("negative_base")) cfg.negative_base = j["negative_base"].get<std::vector<std::string>>();
    if (j.contains("negative_extras")) cfg.negative_extras = j["negative_extras"].get<std::vector<std::string>>();
    if (j.contains("backgrounds")) cfg.backgrounds = j["backgrounds"].get<std::vector<std::string>>();
    if (j.contains("include_extra_negatives")) cfg.include_extra_negatives = j["include_extra_negatives"].get<bool>();
    if (j.contains("class_locations")) {
      cfg.class_locations.clear();
      for (auto& [key, value] : j["class_locations"].items())
        cfg.class_locations[std::stoi(key)] = value.get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("prompt config schema error: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

void PromptConfig::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["locations"] = locations;
  j["times"] = times;
  j["negative_base"] = negative_base;
  j["negative_extras"] = negative_extras;
  j["backgrounds"] = backgrounds;
  j["include_extra_negatives"] = include_extra_negatives;
  nlohmann::json cl = nlohmann::json::object();
  for (const auto& [id, subset] : class_locations) cl[std::to_string(id)] = subset;
  j["class_locations"] = cl;
  write_text_file(path, j.dump(2) + "\n");
}

void PromptConfig::validate() const {
  if (locations.empty()) throw ConfigError("prompt config: empty location vocabulary");
  if (times.empty()) throw ConfigError("prompt config: empty time vocabulary");
  if (backgrounds.empty()) throw ConfigError("prompt config: empty background descriptions");
  for (const auto& [id, subset] : class_locations) {
    if (!ClassRegistry::standard().contains(id))
      throw ConfigError("prompt config: unknown class id " + std::to_string(id));
    if (subset.empty())
      throw ConfigError("prompt config: empty location subset for class " +
                        std::to_string(id));
  }
}

const std::vector<std::string>& PromptConfig::locations_for(int class_id) const {
  auto it = class_locations.find(class_id);
  if (it != class_locations.end()) return it->second;
  return locations;
}

std::string render_positive(const std::string& location, const std::string& time) {
  return "A " + location + " during " + time + " with no vehicle.";
}

PromptSpec build_positive(int class_id, RngStream& rng, const PromptConfig& cfg) {
  if (!ClassRegistry::standard().contains(class_id))
    throw ValidationError("build_positive: class id not in registry");
  const auto& subset = cfg.locations_for(class_id);
  if (subset.empty())
    throw ConfigError("build_positive: empty location subset for class " +
                      std::to_string(class_id));
  PromptSpec spec;
  spec.class_id = class_id;
  spec.location = subset[rng.pick_index(subset.size())];
  spec.time = cfg.times[rng.pick_index(cfg.times.size())];
  spec.positive = render_positive(spec.location, spec.time);
  spec.negative = build_negative(cfg.include_extra_negatives, cfg);
  return spec;
}

std::string build_negative(bool include_extras, const PromptConfig& cfg) {
  std::string out = join(cfg.negative_base);
  if (include_extras && !cfg.negative_extras.empty()) {
    if (!out.empty()) out += ", ";
    out += join(cfg.negative_extras);
  }
  return out;
}

PromptSpec build_background_prompt(RngStream& rng, const PromptConfig& cfg) {
  if (cfg.backgrounds.empty())
    throw ConfigError("build_background_prompt: empty description list");
  PromptSpec spec;
  spec.positive = cfg.backgrounds[rng.pick_index(cfg.backgrounds.size())];
  spec.negative = build_negative(cfg.include_extra_negatives, cfg);
  return spec;
}

}  // namespace outgen
