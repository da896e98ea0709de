#pragma once

#include <map>

#include "vox2fea/core/label_volume.hpp"
#include "vox2fea/core/tet_mesh.hpp"

namespace vox2fea::mesher {

struct QualityReport {
  std::size_t element_count = 0;
  std::size_t node_count = 0;
  double min_dihedral_deg = 0;
  /// Median over elements of each element's smallest dihedral angle.
  double median_dihedral_deg = 0;
  std::size_t inverted_count = 0;
  /// Faces shared by more than two tets, plus boundary faces with an edge no
  /// other boundary face closes (hanging nodes / T-junctions).
  std::size_t nonconformal_faces = 0;
  /// Boundary faces enclosing internal voids (e.g. a missing interior tet).
  std::size_t dangling_faces = 0;
  std::map<LabelCode, std::size_t> label_counts;
  std::map<LabelCode, double> label_volumes_um3;
  /// Symmetric Hausdorff distance, in voxels, between each label's mesh
  /// boundary and its voxel boundary. Empty unless a reference was given.
  std::map<LabelCode, double> hausdorff_voxels;
  /// (mesh volume - voxel volume) / voxel volume per label; reference only.
  std::map<LabelCode, double> volume_error;

  double max_hausdorff_voxels() const;
  double max_abs_volume_error() const;
  /// No inversions and no conformity defects.
  bool valid() const { return inverted_count == 0 && nonconformal_faces == 0 && dangling_faces == 0; }
};

/// Report-only validity and quality audit. With `reference`, also measures
/// boundary fidelity and per-label volume against the voxel labels (mesh
/// coordinates are taken to put voxel (i, j, k) at (i, j, k) * spacing).
QualityReport validate_mesh(const TetMesh& mesh, const LabelVolume* reference = nullptr);

/// Distance from `p` to triangle (a, b, c).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace vox2fea::mesher
