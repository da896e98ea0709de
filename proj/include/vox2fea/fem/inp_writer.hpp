#pragma once

#include <filesystem>
#include <string>

#include "vox2fea/fem/fea_model.hpp"

namespace vox2fea::fem {

struct InpOptions {
  /// C3D4H/C3D10H when set, plain C3D4/C3D10 otherwise.
  bool hybrid = true;
  std::string heading = "vox2fea arterial model";
};

/// Keyword element/set name for a label (WALL, LIPID, CALCIUM, INNER_REFINE,
/// OUTER_REFINE).
std::string elset_name(LabelCode code);

/// The whole keyword file as text. Units are mm, tonne, s and MPa: lengths
/// are converted from micrometres, moduli from kPa, D from 1/kPa.
/// Element order follows the mesh. Identical models give identical bytes.
std::string format_inp(const FeaModel& model, const InpOptions& options = {});

void write_inp(const FeaModel& model, const std::filesystem::path& path, const InpOptions& options = {});

}  // namespace vox2fea::fem
