#pragma once

#include <filesystem>
#include <random>

#include "vox2fea/core/label_volume.hpp"
#include "vox2fea/core/tet_mesh.hpp"

namespace testing {

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Frame with a filled disk of `code` centred in an n x n grid.
vox2fea::LabelVolume disk_frame(int n, double radius_px, vox2fea::LabelCode code, double pixel_um = 20.0,
                                vox2fea::LabelCode fill = vox2fea::label::background);

/// 6 x 6 x 2 box of 20 um cubes: a 2 x 2 lumen core, one lipid and one
/// calcium cell, wall elsewhere. Labels follow tet centroids.
vox2fea::TetMesh tiny_vessel();

/// 3 x 3 x 1 cells of 20 um: lumen centre cell, lipid and calcium corners.
/// The golden keyword files are written from this mesh.
vox2fea::TetMesh small_vessel();

/// Structured box with jittered interior nodes and a random subset of tets
/// removed; every tet keeps positive volume.
vox2fea::TetMesh random_mesh(std::mt19937& rng);

/// Flood-fill component count and sizes (sorted descending), 8-connected in
/// plane when nz == 1, 26-connected otherwise.
std::vector<std::size_t> brute_component_sizes(const std::vector<std::uint8_t>& mask, const vox2fea::Dims& dims);

}  // namespace testing
