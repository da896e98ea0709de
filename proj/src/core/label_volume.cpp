#include "vox2fea/core/label_volume.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace vox2fea {

std::string label_name(LabelCode code) {
  switch (code) {
    case label::background: return "background";
    case label::wall: return "wall";
    case label::lipid: return "lipid";
    case label::calcium: return "calcium";
    case label::lumen: return "lumen";
    case label::inner_refine: return "inner_refine";
    case label::outer_refine: return "outer_refine";
    default: return fmt::format("label{}", code);
  }
}

Palette standard_palette() {
  return {{"background", label::background}, {"wall", label::wall},
          {"lipid", label::lipid},           {"calcium", label::calcium},
          {"lumen", label::lumen},           {"inner_refine", label::inner_refine},
          {"outer_refine", label::outer_refine}};
}

Palette raw_segmentation_palette() {
  return {{"background", raw_label::background}, {"fibrous", raw_label::fibrous},
          {"lipid", raw_label::lipid},           {"calcium", raw_label::calcium},
          {"mixed", raw_label::mixed}};
}

bool palette_contains(const Palette& palette, LabelCode code) {
  return std::any_of(palette.begin(), palette.end(),
                     [code](const auto& entry) { return entry.second == code; });
}

namespace {
void check_geometry(const Dims& dims, const Spacing& spacing) {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
    throw InvalidArgument(
        fmt::format("volume dims must be >= 1, got {}x{}x{}", dims.nx, dims.ny, dims.nz));
  }
  if (!(spacing.x > 0 && spacing.y > 0 && spacing.z > 0)) {
    throw InvalidArgument("voxel spacing must be positive");
  }
}
}  // namespace

LabelVolume::LabelVolume(Dims dims, Spacing spacing, LabelCode fill)
    : dims_(dims), spacing_(spacing) {
  check_geometry(dims_, spacing_);
  voxels_.assign(dims_.count(), fill);
}

LabelVolume::LabelVolume(Dims dims, Spacing spacing, std::vector<LabelCode> voxels)
    : dims_(dims), spacing_(spacing), voxels_(std::move(voxels)) {
  check_geometry(dims_, spacing_);
  if (voxels_.size() != dims_.count()) {
    throw InvalidArgument(fmt::format("voxel count {} does not match dims {}x{}x{}",
                                      voxels_.size(), dims_.nx, dims_.ny, dims_.nz));
  }
}

LabelCode LabelVolume::sample(const Vec3& p) const {
  const int x = static_cast<int>(std::floor(p.x() / spacing_.x + 0.5));
  const int y = static_cast<int>(std::floor(p.y() / spacing_.y + 0.5));
  const int z = static_cast<int>(std::floor(p.z() / spacing_.z + 0.5));
  if (!dims_.contains(x, y, z)) return label::background;
  return at(x, y, z);
}

std::size_t LabelVolume::count(LabelCode code) const {
  return static_cast<std::size_t>(std::count(voxels_.begin(), voxels_.end(), code));
}

std::array<std::size_t, 256> LabelVolume::histogram() const {
  std::array<std::size_t, 256> h{};
  for (LabelCode v : voxels_) ++h[v];
  return h;
}

bool LabelVolume::contains(LabelCode code) const {
  return std::find(voxels_.begin(), voxels_.end(), code) != voxels_.end();
}

LabelVolume LabelVolume::frame(int z) const {
  if (z < 0 || z >= dims_.nz) throw InvalidArgument(fmt::format("slice {} out of range", z));
  const std::size_t n = dims_.slice_count();
  std::vector<LabelCode> data(voxels_.begin() + static_cast<std::ptrdiff_t>(n * z),
                              voxels_.begin() + static_cast<std::ptrdiff_t>(n * (z + 1)));
  LabelVolume out({dims_.nx, dims_.ny, 1}, spacing_, std::move(data));
  out.palette = palette;
  return out;
}

void LabelVolume::set_frame(int z, const LabelVolume& frame) {
  if (z < 0 || z >= dims_.nz) throw InvalidArgument(fmt::format("slice {} out of range", z));
  if (frame.dims().nx != dims_.nx || frame.dims().ny != dims_.ny || frame.dims().nz != 1) {
    throw InvalidArgument("frame dims do not match volume");
  }
  std::copy(frame.voxels_.begin(), frame.voxels_.end(),
            voxels_.begin() + static_cast<std::ptrdiff_t>(dims_.slice_count() * z));
}

bool LabelVolume::is_isotropic(double rel_tol) const {
  const double s = spacing_.x;
  return std::abs(spacing_.y - s) <= rel_tol * s && std::abs(spacing_.z - s) <= rel_tol * s;
}

std::vector<std::uint8_t> mask_of(const LabelVolume& vol, LabelCode code) {
  std::vector<std::uint8_t> m(vol.size());
  const auto v = vol.voxels();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = v[i] == code ? 1 : 0;
  return m;
}

}  // namespace vox2fea
