#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "outgen/canvas.hpp"
#include "outgen/error.hpp"
#include "outgen/geometry.hpp"
#include "outgen/outpaint.hpp"
#include "outgen/util.hpp"

namespace outgen {

// Line-delimited JSON manifests connect the pipeline stages so each stage is
// independently rerunnable. Rows are written in a deterministic order.

// Input to extract-seeds: the human-curated source listing.
struct SourceManifestRow {
  std::string source_path;
  int class_id = 0;
  std::string seed_id;  // optional; defaults to seed-<index>
};

struct SeedManifestRow {
  std::string seed_id;
  std::string source_path;
  int class_id = 0;
  std::string status;  // "accepted" | "rejected"
  std::string reason;
  PixelBox crop_box;
  BufferSpec buffer;
  int crop_width = 0, crop_height = 0;
  std::string image_path;  // stored crop raster
};

struct ComposeManifestRow {
  std::string seed_id;
  int image_index = 0;
  int class_id = 0;
  std::string status;
  std::string reason;
  std::string canvas_path;
  std::string mask_path;
  bool mask_inverted = false;  // true: stored mask uses 0 = generate
  NormAnnotation annotation;
  PlacementSpec placement;
  BufferSpec buffer;
  int crop_width = 0, crop_height = 0;

  std::string item_id() const {
    return seed_id + "#" + std::to_string(image_index);
  }
};

struct OutpaintManifestRow {
  std::string item_id;
  std::string kind;  // "vehicle" | "background"
  std::string seed_id;
  int image_index = 0;
  int class_id = -1;  // -1 for backgrounds
  std::string status;
  std::string reason;
  std::string image_path;
  std::string label_path;
  int attempts = 0;
  std::optional<double> tv, brisque, clip_iqa;
};

struct AttemptLogRow {
  std::string item_id;
  int attempt = 0;
  uint64_t noise_seed = 0;
  std::string positive, negative;
  std::optional<double> tv, brisque, clip_iqa;
  std::string pass_tv, pass_brisque, pass_clipiqa;  // passed/failed/skipped
  bool pass_all = false;
  bool backend_error = false;
  std::string error;
  bool accepted = false;
};

void to_json(nlohmann::json& j, const PixelBox& box);
void from_json(const nlohmann::json& j, PixelBox& box);
void to_json(nlohmann::json& j, const BufferSpec& spec);
void from_json(const nlohmann::json& j, BufferSpec& spec);
void to_json(nlohmann::json& j, const NormAnnotation& a);
void from_json(const nlohmann::json& j, NormAnnotation& a);
void to_json(nlohmann::json& j, const PlacementSpec& p);
void from_json(const nlohmann::json& j, PlacementSpec& p);
void to_json(nlohmann::json& j, const SourceManifestRow& row);
void from_json(const nlohmann::json& j, SourceManifestRow& row);
void to_json(nlohmann::json& j, const SeedManifestRow& row);
void from_json(const nlohmann::json& j, SeedManifestRow& row);
void to_json(nlohmann::json& j, const ComposeManifestRow& row);
void from_json(const nlohmann::json& j, ComposeManifestRow& row);
void to_json(nlohmann::json& j, const OutpaintManifestRow& row);
void from_json(const nlohmann::json& j, OutpaintManifestRow& row);
void to_json(nlohmann::json& j, const AttemptLogRow& row);
void from_json(const nlohmann::json& j, AttemptLogRow& row);

AttemptLogRow attempt_log_row(const AttemptRecord& record);

template <typename Row>
void write_jsonl(const std::filesystem::path& path, const std::vector<Row>& rows) {
  std::string text;
  for (const auto& row : rows) {
    nlohmann::json j = row;
    text += j.dump();
    text += "\n";
  }
  write_text_file(path, text);
}

template <typename Row>
std::vector<Row> read_jsonl(const std::filesystem::path& path) {
  std::vector<Row> rows;
  std::istringstream stream(read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line).get<Row>());
    } catch (const nlohmann::json::exception& e) {
      throw IoError("manifest " + path.string() + " line " +
                    std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace outgen
