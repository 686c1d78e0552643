#include "outgen/report.hpp"

#include <sstream>

#include <opencv2/imgproc.hpp>

#include "outgen/error.hpp"
#include "outgen/manifest.hpp"
#include "outgen/util.hpp"

namespace outgen {

namespace {

std::string html_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string make_thumb(const OutpaintManifestRow& row,
                       const std::filesystem::path& thumbs_dir) {
  cv::Mat image = read_image(row.image_path);
  if (!row.label_path.empty() && std::filesystem::exists(row.label_path)) {
    for (const auto& a : parse_labels(read_text_file(row.label_path))) {
      cv::Rect box(static_cast<int>((a.cx - a.w / 2) * image.cols),
                   static_cast<int>((a.cy - a.h / 2) * image.rows),
                   static_cast<int>(a.w * image.cols),
                   static_cast<int>(a.h * image.rows));
      cv::rectangle(image, box, cv::Scalar(64, 220, 64), 2);
    }
  }
  const int max_side = 192;
  double scale = static_cast<double>(max_side) / std::max(image.cols, image.rows);
  if (scale < 1)
    cv::resize(image, image, cv::Size(), scale, scale, cv::INTER_AREA);
  std::filesystem::path thumb = thumbs_dir / (row.item_id + ".png");
  write_image(thumb, image);
  return thumb.filename().string();
}

std::string score_line(const OutpaintManifestRow& row) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  if (row.tv) os << "tv " << *row.tv;
  if (row.brisque) os << " · brisque " << *row.brisque;
  if (row.clip_iqa) os << " · clip-iqa " << *row.clip_iqa;
  os << " · attempts " << row.attempts;
  return os.str();
}

}  // namespace

std::filesystem::path write_gallery(const PipelineConfig& cfg,
                                    const std::filesystem::path& out_dir) {
  std::vector<OutpaintManifestRow> rows;
  if (std::filesystem::exists(cfg.outpaint_manifest_path()))
    rows = read_jsonl<OutpaintManifestRow>(cfg.outpaint_manifest_path());
  if (std::filesystem::exists(cfg.background_manifest_path()))
    for (auto& row : read_jsonl<OutpaintManifestRow>(cfg.background_manifest_path()))
      rows.push_back(std::move(row));
  if (rows.empty())
    throw IoError("report: no outpaint/background manifests in workdir");

  const auto thumbs_dir = out_dir / "thumbs";
  std::filesystem::create_directories(thumbs_dir);

  int accepted = 0, rejected = 0;
  std::ostringstream cards;
  for (const auto& row : rows) {
    if (row.status != "accepted") {
      ++rejected;
      continue;
    }
    ++accepted;
    std::string thumb = make_thumb(row, thumbs_dir);
    cards << "<div class=card><img src=\"thumbs/" << thumb << "\">"
          << "<div class=meta><b>" << html_escape(row.item_id) << "</b>"
          << " <span class=kind>" << row.kind << "</span><br>"
          << score_line(row) << "</div></div>\n";
  }

  std::ostringstream html;
  html << "<!doctype html><html><head><meta charset=\"utf-8\">"
       << "<title>generation report</title><style>\n"
       << "body{font-family:sans-serif;margin:24px;background:#fafafa}\n"
       << ".grid{display:flex;flex-wrap:wrap;gap:12px}\n"
       << ".card{background:#fff;border:1px solid #ddd;border-radius:6px;"
       << "padding:8px;width:200px}\n"
       << ".card img{width:192px;display:block}\n"
       << ".meta{font-size:12px;margin-top:6px;color:#333}\n"
       << ".kind{color:#888}\n"
       << "pre{background:#fff;border:1px solid #ddd;padding:12px;"
       << "border-radius:6px;overflow-x:auto}\n"
       << "</style></head><body>\n";
  html << "<h1>generation report</h1>\n";
  html << "<p>" << accepted << " accepted, " << rejected << " rejected</p>\n";

  if (std::filesystem::exists(cfg.run_report_path()))
    html << "<h2>run summary</h2><pre>"
         << html_escape(read_text_file(cfg.run_report_path())) << "</pre>\n";
  auto distribution = cfg.workdir_path() / "distribution.txt";
  if (std::filesystem::exists(distribution))
    html << "<h2>split distribution</h2><pre>"
         << html_escape(read_text_file(distribution)) << "</pre>\n";
  auto ranking = cfg.workdir_path() / "detector_ranking.json";
  if (std::filesystem::exists(ranking))
    html << "<h2>detector ranking</h2><pre>"
         << html_escape(read_text_file(ranking)) << "</pre>\n";

  html << "<h2>images</h2><div class=grid>\n" << cards.str() << "</div>\n";
  html << "</body></html>\n";

  auto index = out_dir / "index.html";
  write_text_file(index, html.str());
  return index;
}

}  // namespace outgen
