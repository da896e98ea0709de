#pragma once

#include <filesystem>

#include "vox2fea/core/label_volume.hpp"

namespace vox2fea {

/// A labelmap on disk is `<name>.json` (dims, spacing_um, frame_positions,
/// palette) next to `<name>.raw` holding nx*ny*nz unsigned bytes, x-fastest.
/// `path` may name either file or the common stem.
LabelVolume load_label_volume(const std::filesystem::path& path);

/// Writes `<stem>.json` and `<stem>.raw`; returns the two paths written.
std::pair<std::filesystem::path, std::filesystem::path> save_label_volume(
    const LabelVolume& vol, const std::filesystem::path& path);

/// Stem of a labelmap path with any .json/.raw extension removed.
std::filesystem::path labelmap_stem(const std::filesystem::path& path);

}  // namespace vox2fea
