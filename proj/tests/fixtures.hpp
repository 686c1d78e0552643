#pragma once

// Builds a complete on-disk fixture environment: synthetic source photos,
// detector sidecar files, a curated sources manifest, and a pipeline config
// rooted in a scratch directory.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "testsupport.hpp"
#include "outgen/config.hpp"
#include "outgen/manifest.hpp"
#include "outgen/util.hpp"

namespace fixtures {

struct Environment {
  std::filesystem::path root;
  outgen::PipelineConfig cfg;
};

// `seed_count` sources cycling through the nine classes, each with a
// detectable vehicle box agreed on by every fixture detector.
inline Environment make_environment(const std::filesystem::path& root,
                                    int seed_count, uint64_t global_seed = 7) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "sources");
  fs::create_directories(root / "work");

  std::vector<outgen::SourceManifestRow> sources;
  for (int i = 0; i < seed_count; ++i) {
    outgen::RngStream rng(1000 + i);
    int w = 200 + static_cast<int>(rng.uniform_int(200));
    int h = 150 + static_cast<int>(rng.uniform_int(150));
    double x0 = 30 + rng.uniform(0, 80);
    double y0 = 30 + rng.uniform(0, 60);
    outgen::PixelBox box{x0, y0, x0 + w, y0 + h};
    int img_w = static_cast<int>(box.x_max) + 60;
    int img_h = static_cast<int>(box.y_max) + 60;

    auto image_path = root / "sources" / ("photo" + std::to_string(i) + ".png");
    outgen::write_image(image_path,
                        testsupport::make_source_image(img_w, img_h, box, i));

    nlohmann::json sidecar;
    for (const auto& model : outgen::ensemble_order()) {
      sidecar[model] = {{{"box", {box.x_min, box.y_min, box.x_max, box.y_max}},
                         {"confidence", 0.95},
                         {"class", "car"}}};
    }
    outgen::write_text_file(image_path.string() + ".boxes.json", sidecar.dump());

    char seed_id[32];
    std::snprintf(seed_id, sizeof(seed_id), "seed-%05d", i);
    sources.push_back({image_path.string(), i % 9, seed_id});
  }
  auto manifest_path = root / "sources.jsonl";
  outgen::write_jsonl(manifest_path, sources);

  Environment env;
  env.root = root;
  env.cfg.sources_manifest = manifest_path.string();
  env.cfg.workdir = (root / "work").string();
  env.cfg.dataset_root = (root / "dataset").string();
  env.cfg.global_seed = global_seed;
  return env;
}

}  // namespace fixtures
