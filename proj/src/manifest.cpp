#include "outgen/manifest.hpp"

namespace outgen {

namespace {

void put_optional(nlohmann::json& j, const char* key,
                  const std::optional<double>& value) {
  if (value) j[key] = *value;
  else j[key] = nullptr;
}

std::optional<double> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const PixelBox& box) {
  j = {box.x_min, box.y_min, box.x_max, box.y_max};
}

void from_json(const nlohmann::json& j, PixelBox& box) {
  box = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
         j.at(3).get<double>()};
}

void to_json(nlohmann::json& j, const BufferSpec& spec) {
  j = {{"factor", spec.buffer_factor}, {"left", spec.left},   {"top", spec.top},
       {"right", spec.right},          {"bottom", spec.bottom}};
}

void from_json(const nlohmann::json& j, BufferSpec& spec) {
  spec.buffer_factor = j.at("factor").get<double>();
  spec.left = j.at("left").get<double>();
  spec.top = j.at("top").get<double>();
  spec.right = j.at("right").get<double>();
  spec.bottom = j.at("bottom").get<double>();
}

void to_json(nlohmann::json& j, const NormAnnotation& a) {
  j = {{"class_id", a.class_id}, {"cx", a.cx}, {"cy", a.cy}, {"w", a.w}, {"h", a.h}};
}

void from_json(const nlohmann::json& j, NormAnnotation& a) {
  a.class_id = j.at("class_id").get<int>();
  a.cx = j.at("cx").get<double>();
  a.cy = j.at("cy").get<double>();
  a.w = j.at("w").get<double>();
  a.h = j.at("h").get<double>();
}

void to_json(nlohmann::json& j, const PlacementSpec& p) {
  j = {{"canvas_size", p.canvas_size},
       {"scale", p.scale},
       {"x0", p.x0},
       {"y0", p.y0},
       {"channel_perm", p.channel_perm}};
}

void from_json(const nlohmann::json& j, PlacementSpec& p) {
  p.canvas_size = j.at("canvas_size").get<int>();
  p.scale = j.at("scale").get<double>();
  p.x0 = j.at("x0").get<double>();
  p.y0 = j.at("y0").get<double>();
  p.channel_perm = j.at("channel_perm").get<int>();
}

void to_json(nlohmann::json& j, const SourceManifestRow& row) {
  j = {{"source_path", row.source_path}, {"class_id", row.class_id}};
  if (!row.seed_id.empty()) j["seed_id"] = row.seed_id;
}

void from_json(const nlohmann::json& j, SourceManifestRow& row) {
  row.source_path = j.at("source_path").get<std::string>();
  row.class_id = j.at("class_id").get<int>();
  row.seed_id = j.value("seed_id", "");
}

void to_json(nlohmann::json& j, const SeedManifestRow& row) {
  j = {{"seed_id", row.seed_id},
       {"source_path", row.source_path},
       {"class_id", row.class_id},
       {"status", row.status},
       {"reason", row.reason},
       {"crop", row.crop_box},
       {"buffer", row.buffer},
       {"crop_width", row.crop_width},
       {"crop_height", row.crop_height},
       {"image_path", row.image_path}};
}

void from_json(const nlohmann::json& j, SeedManifestRow& row) {
  row.seed_id = j.at("seed_id").get<std::string>();
  row.source_path = j.at("source_path").get<std::string>();
  row.class_id = j.at("class_id").get<int>();
  row.status = j.at("status").get<std::string>();
  row.reason = j.value("reason", "");
  if (j.contains("crop")) row.crop_box = j.at("crop").get<PixelBox>();
  if (j.contains("buffer")) row.buffer = j.at("buffer").get<BufferSpec>();
  row.crop_width = j.value("crop_width", 0);
  row.crop_height = j.value("crop_height", 0);
  row.image_path = j.value("image_path", "");
}

void to_json(nlohmann::json& j, const ComposeManifestRow& row) {
  j = {{"seed_id", row.seed_id},
       {"image_index", row.image_index},
       {"class_id", row.class_id},
       {"status", row.status},
       {"reason", row.reason},
       {"canvas_path", row.canvas_path},
       {"mask_path", row.mask_path},
       {"mask_inverted", row.mask_inverted},
       {"annotation", row.annotation},
       {"placement", row.placement},
       {"buffer", row.buffer},
       {"crop_width", row.crop_width},
       {"crop_height", row.crop_height}};
}

void from_json(const nlohmann::json& j, ComposeManifestRow& row) {
  row.seed_id = j.at("seed_id").get<std::string>();
  row.image_index = j.at("image_index").get<int>();
  row.class_id = j.at("class_id").get<int>();
  row.status = j.at("status").get<std::string>();
  row.reason = j.value("reason", "");
  row.canvas_path = j.value("canvas_path", "");
  row.mask_path = j.value("mask_path", "");
  row.mask_inverted = j.value("mask_inverted", false);
  if (j.contains("annotation")) row.annotation = j.at("annotation").get<NormAnnotation>();
  if (j.contains("placement")) row.placement = j.at("placement").get<PlacementSpec>();
  if (j.contains("buffer")) row.buffer = j.at("buffer").get<BufferSpec>();
  row.crop_width = j.value("crop_width", 0);
  row.crop_height = j.value("crop_height", 0);
}

void to_json(nlohmann::json& j, const OutpaintManifestRow& row) {
  j = {{"item_id", row.item_id},
       {"kind", row.kind},
       {"seed_id", row.seed_id},
       {"image_index", row.image_index},
       {"class_id", row.class_id},
       {"status", row.status},
       {"reason", row.reason},
       {"image_path", row.image_path},
       {"label_path", row.label_path},
       {"attempts", row.attempts}};
  put_optional(j, "tv", row.tv);
  put_optional(j, "brisque", row.brisque);
  put_optional(j, "clip_iqa", row.clip_iqa);
}

void from_json(const nlohmann::json& j, OutpaintManifestRow& row) {
  row.item_id = j.at("item_id").get<std::string>();
  row.kind = j.at("kind").get<std::string>();
  row.seed_id = j.value("seed_id", "");
  row.image_index = j.value("image_index", 0);
  row.class_id = j.value("class_id", -1);
  row.status = j.at("status").get<std::string>();
  row.reason = j.value("reason", "");
  row.image_path = j.value("image_path", "");
  row.label_path = j.value("label_path", "");
  row.attempts = j.value("attempts", 0);
  row.tv = get_optional(j, "tv");
  row.brisque = get_optional(j, "brisque");
  row.clip_iqa = get_optional(j, "clip_iqa");
}

void to_json(nlohmann::json& j, const AttemptLogRow& row) {
  j = {{"item_id", row.item_id},
       {"attempt", row.attempt},
       {"noise_seed", row.noise_seed},
       {"positive", row.positive},
       {"negative", row.negative},
       {"pass_tv", row.pass_tv},
       {"pass_brisque", row.pass_brisque},
       {"pass_clipiqa", row.pass_clipiqa},
       {"pass_all", row.pass_all},
       {"backend_error", row.backend_error},
       {"error", row.error},
       {"accepted", row.accepted}};
  put_optional(j, "tv", row.tv);
  put_optional(j, "brisque", row.brisque);
  put_optional(j, "clip_iqa", row.clip_iqa);
}

void from_json(const nlohmann::json& j, AttemptLogRow& row) {
  row.item_id = j.at("item_id").get<std::string>();
  row.attempt = j.at("attempt").get<int>();
  row.noise_seed = j.at("noise_seed").get<uint64_t>();
  row.positive = j.value("positive", "");
  row.negative = j.value("negative", "");
  row.pass_tv = j.value("pass_tv", "");
  row.pass_brisque = j.value("pass_brisque", "");
  row.pass_clipiqa = j.value("pass_clipiqa", "");
  row.pass_all = j.value("pass_all", false);
  row.backend_error = j.value("backend_error", false);
  row.error = j.value("error", "");
  row.accepted = j.value("accepted", false);
  row.tv = get_optional(j, "tv");
  row.brisque = get_optional(j, "brisque");
  row.clip_iqa = get_optional(j, "clip_iqa");
}

AttemptLogRow attempt_log_row(const AttemptRecord& record) {
  AttemptLogRow row;
  row.item_id = record.item_id;
  row.attempt = record.attempt;
  row.noise_seed = record.noise_seed;
  row.positive = record.positive;
  row.negative = record.negative;
  row.backend_error = record.backend_error;
  row.error = record.error;
  row.accepted = record.accepted;
  if (!record.backend_error) {
    row.tv = record.quality.tv;
    row.brisque = record.quality.brisque;
    row.clip_iqa = record.quality.clip_iqa;
    row.pass_tv = gate_flag_name(record.quality.pass_tv);
    row.pass_brisque = gate_flag_name(record.quality.pass_brisque);
    row.pass_clipiqa = gate_flag_name(record.quality.pass_clipiqa);
    row.pass_all = record.quality.pass_all;
  }
  return row;
}

}  // namespace outgen
