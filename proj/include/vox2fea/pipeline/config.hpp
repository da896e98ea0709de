#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vox2fea/fem/fea_model.hpp"
#include "vox2fea/fem/inp_writer.hpp"
#include "vox2fea/mesher/lattice_mesher.hpp"
#include "vox2fea/mesher/optimize.hpp"
#include "vox2fea/mesher/sizing.hpp"
#include "vox2fea/microfe/solver.hpp"
#include "vox2fea/preprocess/preprocess.hpp"

namespace vox2fea::pipeline {

struct SizingConfig {
  double inner_max_volume = 2.83;
  /// 0 derives the value from the inner one (2x and 8x).
  double outer_max_volume = 0;
  double default_max_volume = 0;
  mesher::SizingField field() const;
};

struct ConvergenceConfig {
  /// Inner-layer max tet volume per rung, coarse to fine.
  std::vector<double> inner_volumes{2.83, 1.415, 0.7075};
  /// Probe slab centres; empty picks the interior frame positions.
  std::vector<double> probe_z_um;
  double probe_half_thickness_um = 20;
};

/// Everything a run needs. Sections map one to one onto the INI file:
/// [input] labelmap, [output] dir, [preprocess], [interpolate], [sizing],
/// [mesher], [optimize], [boundary], [export], [solver], [stages],
/// [convergence], [run].
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir;
  preprocess::PreprocessConfig preprocess;
  double target_spacing_um = 20;
  SizingConfig sizing;
  mesher::MesherConfig mesher;
  mesher::OptimizeConfig optimize;
  fem::BoundarySpec boundary;
  ElementOrder element_order = ElementOrder::quadratic;
  fem::InpOptions inp;
  microfe::SolverOptions solver;
  double soft_tissue_poisson = 0.49;
  bool run_optimize = true;
  bool run_verify = false;
  ConvergenceConfig convergence;
  /// Nothing in the pipeline is random; kept so configs can pin it anyway.
  std::uint64_t seed = 0;

  /// Throws InvalidArgument naming the offending key.
  void validate() const;
  /// Canonical text of one section (sorted key = value lines); stage cache
  /// keys hash these so unrelated edits do not invalidate a stage.
  std::string section_text(const std::string& section) const;
};

/// Parses an INI file. Relative paths resolve against the file's directory.
/// Unknown sections or keys are errors.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace vox2fea::pipeline
