#pragma once

#include "vox2fea/core/tet_mesh.hpp"

namespace vox2fea::mesher {

/// Box of nx * ny * nz cubes of side `cell_um`, each split into six tets
/// along its main diagonal (conformal across cubes).
TetMesh structured_box(int nx, int ny, int nz, double cell_um, const Vec3& origin_um = Vec3::Zero(),
                       LabelCode code = label::wall);

/// Thick-walled tube around the z axis, inner radius a, outer radius b,
/// z in [0, length]; nr radial, ntheta circumferential and nz axial cells,
/// each split like structured_box in (r, theta, z) index space.
TetMesh structured_annulus(double inner_um, double outer_um, double length_um, int nr, int ntheta, int nz,
                           LabelCode code = label::wall);

}  // namespace vox2fea::mesher
