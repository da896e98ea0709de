#pragma once

#include <map>
#include <vector>

#include <Eigen/Sparse>

#include "vox2fea/core/material.hpp"
#include "vox2fea/core/tet_mesh.hpp"

namespace vox2fea::microfe {

// The solver works in mm, N and MPa. Meshes arrive in micrometres and are
// converted on the fly.
inline constexpr double kUmPerMm = 1000.0;

using MaterialTable = std::map<LabelCode, LinearElastic>;

/// Linear stand-ins for every card (see vox2fea::linearize).
MaterialTable linearize_materials(const std::map<LabelCode, MaterialModel>& cards,
                                  double soft_tissue_poisson = 0.49);

/// Isotropic elasticity matrix in Voigt order xx, yy, zz, xy, yz, zx with
/// engineering shear strains.
Eigen::Matrix<double, 6, 6> elasticity_matrix(const LinearElastic& m);

/// Strain-displacement matrix of a linear tet (coordinates in mm) and its
/// volume in mm^3; throws ComputationError for degenerate tets.
Eigen::Matrix<double, 6, 12> strain_displacement(const std::array<Vec3, 4>& corners_mm, double* volume_mm3);

struct PressureLoad {
  std::vector<FaceRef> faces;
  double pressure_mpa = 0;
};

struct LinearSystem {
  Eigen::SparseMatrix<double> stiffness;  // 3 DOFs per node, node-major
  Eigen::VectorXd load;
};

/// Consistent nodal forces of a uniform pressure on element faces: each face
/// node receives area / 3 times the pressure along the inward face normal.
Eigen::VectorXd pressure_load_vector(const TetMesh& mesh, const PressureLoad& load);

/// Global stiffness of a linear tet mesh plus the pressure load vector.
LinearSystem assemble(const TetMesh& mesh, const MaterialTable& materials,
                      const std::vector<PressureLoad>& loads = {});

}  // namespace vox2fea::microfe
