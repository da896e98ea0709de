#pragma once

#include <utility>

#include "vox2fea/core/tet_mesh.hpp"
#include "vox2fea/mesher/quality.hpp"

namespace vox2fea::mesher {

struct OptimizeConfig {
  double target_min_dihedral_deg = 15.0;
  /// Voxel edge length; sets the displacement cap for boundary nodes.
  double voxel_um = 20.0;
  /// Nodes on a label boundary or the outer surface never end up further
  /// than this from where they started, in voxels.
  double max_interface_shift_voxels = 0.25;
  int max_passes = 8;
  bool flips = true;
};

/// Best-effort quality improvement: quality-gated Laplacian smoothing (which
/// also untangles inverted tets) and 2-3 / 3-2 flips between tets of the same
/// label. Only nodes touching a tet below the target are moved. Flips are
/// skipped when the mesh already carries surfaces.
std::pair<TetMesh, QualityReport> optimize_mesh(const TetMesh& mesh, const OptimizeConfig& cfg = {});

}  // namespace vox2fea::mesher
