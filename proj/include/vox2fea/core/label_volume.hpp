#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vox2fea/core/types.hpp"

namespace vox2fea {

struct Dims {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  std::size_t slice_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * ny + y) * nx + x;
  }
  bool operator==(const Dims&) const = default;
};

/// Voxel spacing in micrometres.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  bool operator==(const Spacing&) const = default;
  double voxel_volume() const { return x * y * z; }
};

/// Name -> code mapping that every voxel of a volume is checked against.
using Palette = std::map<std::string, LabelCode>;

Palette standard_palette();
Palette raw_segmentation_palette();
bool palette_contains(const Palette& palette, LabelCode code);

/// Dense voxel grid of label codes, x-fastest. A frame is a volume with nz == 1.
class LabelVolume {
 public:
  LabelVolume() = default;
  LabelVolume(Dims dims, Spacing spacing, LabelCode fill = label::background);
  LabelVolume(Dims dims, Spacing spacing, std::vector<LabelCode> voxels);

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return voxels_.size(); }

  LabelCode at(int x, int y, int z = 0) const { return voxels_[dims_.index(x, y, z)]; }
  LabelCode& at(int x, int y, int z = 0) { return voxels_[dims_.index(x, y, z)]; }
  LabelCode operator[](std::size_t i) const { return voxels_[i]; }
  LabelCode& operator[](std::size_t i) { return voxels_[i]; }

  std::span<const LabelCode> voxels() const { return voxels_; }
  std::span<LabelCode> voxels() { return voxels_; }

  /// Label at the voxel containing a point given in micrometres, with voxel
  /// centres at index * spacing. Points outside the grid are background.
  LabelCode sample(const Vec3& point_um) const;

  std::size_t count(LabelCode code) const;
  std::array<std::size_t, 256> histogram() const;
  bool contains(LabelCode code) const;

  /// Copy of slice z as a frame, keeping in-plane spacing.
  LabelVolume frame(int z) const;
  void set_frame(int z, const LabelVolume& frame);

  bool is_isotropic(double rel_tol = 1e-9) const;

  /// z-indices holding original (physical) frames.
  std::vector<int> frame_positions;
  Palette palette = standard_palette();

  bool operator==(const LabelVolume& other) const {
    return dims_ == other.dims_ && spacing_ == other.spacing_ && voxels_ == other.voxels_;
  }

 private:
  Dims dims_;
  Spacing spacing_;
  std::vector<LabelCode> voxels_;
};

/// Binary mask helpers.
std::vector<std::uint8_t> mask_of(const LabelVolume& vol, LabelCode code);

}  // namespace vox2fea
