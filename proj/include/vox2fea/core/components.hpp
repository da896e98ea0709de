#pragma once

#include <cstdint>
#include <vector>

#include "vox2fea/core/label_volume.hpp"

namespace vox2fea {

enum class Connectivity {
  planar8,       // in-slice 8-neighbourhood; slices never connect
  volumetric26,  // full 3D 26-neighbourhood
};

/// Per-voxel component ids. Ids are dense from 1 in first-voxel scan order;
/// id 0 marks voxels outside the labelled set.
struct ComponentMap {
  Dims dims;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> sizes;  // sizes[id - 1]

  std::size_t count() const { return sizes.size(); }
  std::size_t size_of(std::uint32_t id) const { return sizes[id - 1]; }
  /// Component ids ordered by size, largest first; ties keep id order.
  std::vector<std::uint32_t> by_size_descending() const;
  /// Voxel-index centroid (x, y, z) of every component, indexed by id - 1.
  std::vector<Vec3> centroids() const;
};

ComponentMap connected_components(std::span<const std::uint8_t> mask, const Dims& dims,
                                  Connectivity connectivity);

ComponentMap connected_components(const LabelVolume& vol, LabelCode code,
                                  Connectivity connectivity);

/// Default for the volume's shape: planar8 for frames, volumetric26 otherwise.
Connectivity default_connectivity(const Dims& dims);

}  // namespace vox2fea
