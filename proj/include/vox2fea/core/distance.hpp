#pragma once

#include <span>
#include <vector>

#include "vox2fea/core/label_volume.hpp"

namespace vox2fea {

/// Value stored where the source set is empty, in micrometres.
inline constexpr double kDistanceSentinelUm = 1e9;

/// Signed distance samples on a voxel grid: negative inside the source set,
/// zero on its boundary voxels, positive outside; units are micrometres.
struct DistanceField {
  Dims dims;
  Spacing spacing;
  std::vector<double> values;
  double sentinel = kDistanceSentinelUm;
  bool empty_source = false;

  double at(int x, int y, int z = 0) const { return values[dims.index(x, y, z)]; }
};

/// Exact squared Euclidean distance (um^2) from every voxel centre to the
/// nearest site voxel centre; +infinity when there are no sites. Separable
/// lower-envelope transform, one pass per axis.
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> sites,
                                               const Dims& dims, const Spacing& spacing);

/// sqrt of the above.
std::vector<double> distance_transform(std::span<const std::uint8_t> sites, const Dims& dims,
                                       const Spacing& spacing);

/// Boundary voxels of a mask: members with a face neighbour (in-plane only
/// when nz == 1) outside the mask or outside the grid.
std::vector<std::uint8_t> boundary_voxels(std::span<const std::uint8_t> mask, const Dims& dims);

/// Signed distance of an arbitrary mask (2D when dims.nz == 1).
DistanceField signed_distance(std::span<const std::uint8_t> mask, const Dims& dims,
                              const Spacing& spacing);

/// Signed distance with the zero level on the faces between member and
/// non-member voxels: members hold -(distance to the nearest non-member
/// centre - h/2), others distance to the nearest member centre - h/2, with
/// h the smallest spacing. The set {f <= 0} is the mask itself, and a blend
/// of two such fields does not shrink toward the voxel-centre staircase.
DistanceField interface_signed_distance(std::span<const std::uint8_t> mask, const Dims& dims,
                                        const Spacing& spacing);

/// Signed distance of one label in a single frame.
DistanceField signed_distance(const LabelVolume& frame, LabelCode code);

}  // namespace vox2fea
