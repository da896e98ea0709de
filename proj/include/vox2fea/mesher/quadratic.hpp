#pragma once

#include "vox2fea/core/tet_mesh.hpp"

namespace vox2fea::mesher {

/// Adds one midside node per unique edge (at its exact midpoint) and returns a
/// 10-node mesh. Midside node i of an element sits on kTetEdges[i]. Node sets
/// and surfaces carry over unchanged.
TetMesh to_quadratic(const TetMesh& mesh);

}  // namespace vox2fea::mesher
