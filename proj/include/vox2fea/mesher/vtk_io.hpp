#pragma once

#include <filesystem>

#include "vox2fea/core/tet_mesh.hpp"

namespace vox2fea::mesher {

/// Legacy ASCII unstructured grid: points, tet cells and a per-cell "label"
/// scalar. Coordinates are written round-trip exact.
void write_vtk(const TetMesh& mesh, const std::filesystem::path& path);

/// Reads what write_vtk writes (4- and 10-node tets, optional label scalar).
TetMesh read_vtk(const std::filesystem::path& path);

}  // namespace vox2fea::mesher
