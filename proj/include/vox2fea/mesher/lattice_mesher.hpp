#pragma once

#include "vox2fea/core/diagnostics.hpp"
#include "vox2fea/core/label_volume.hpp"
#include "vox2fea/core/tet_mesh.hpp"
#include "vox2fea/mesher/sizing.hpp"

namespace vox2fea::mesher {

struct MesherConfig {
  /// Target tet volume as a fraction of the label's maximum.
  double fill_factor = 0.9;
  /// Coarsest octree level allowed for cells that straddle a label change.
  int interface_level = 0;
  /// Coarsest level for cells where three or more labels meet.
  int junction_level = -1;
  /// Refine cells holding lipid/calcium components thinner than one cell.
  bool refine_small_features = true;
  /// Move interface nodes onto the voxel label boundary.
  bool snap_interfaces = true;
  int snap_sweeps = 3;
  /// Snapping never pushes an incident tet below this angle (or below its
  /// current angle when that is already lower).
  double snap_min_dihedral_deg = 12.0;
};

/// Octree-graded body-centred lattice tetrahedralisation of a labelled
/// volume. Leaves are sized per label from `sizing`; tets joining the centres
/// of two equal leaves through a shared face form the body-centred lattice,
/// and faces next to a size change (or in regions whose sizing needs it) are
/// fanned from their centre, which keeps every face conformal. Tets take the
/// voxel label at their centroid; background tets are dropped.
TetMesh generate_tet_mesh(const LabelVolume& vol, const SizingField& sizing,
                          const MesherConfig& cfg = {}, Diagnostics* diag = nullptr);

/// Side of the finest regular leaf, in voxels, for the given sizing.
double base_cell_size_voxels(const SizingField& sizing, double fill_factor,
                             std::span<const LabelCode> present_labels);

}  // namespace vox2fea::mesher
