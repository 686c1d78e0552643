#pragma once

#include <filesystem>

#include "outgen/config.hpp"

namespace outgen {

// Emits a static gallery page (index.html plus thumbnails with annotation
// overlays) summarizing the run: counts, score distributions, the split
// table when present, and a per-item card grid. A generated artifact, not
// an interactive application.
std::filesystem::path write_gallery(const PipelineConfig& cfg,
                                    const std::filesystem::path& out_dir);

}  // namespace outgen
