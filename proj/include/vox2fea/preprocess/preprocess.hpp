#pragma once

#include "vox2fea/core/diagnostics.hpp"
#include "vox2fea/core/label_volume.hpp"

namespace vox2fea::preprocess {

struct PreprocessConfig {
  double min_component_area_px = 150;
  double min_wall_thickness_um = 500;
  double lipid_cap_thickness_um = 200;
  double inner_refine_radius_um = 200;
  double outer_refine_radius_um = 200;

  void validate() const;
};

/// Fibrous and mixed tissue become wall; lipid, calcium and background stay.
LabelVolume pool_labels(const LabelVolume& frame);

/// The second largest background component becomes lumen. Further enclosed
/// cavities stay background and are reported through `diag`. A frame that
/// already holds lumen is returned unchanged.
LabelVolume isolate_lumen(const LabelVolume& frame, Diagnostics* diag = nullptr);

/// Wall and lipid components smaller than the area threshold (strictly) take
/// the majority label of their 8-neighbourhood; calcium is never filtered.
LabelVolume filter_small_components(const LabelVolume& frame, const PreprocessConfig& cfg);

/// Background within the minimum wall thickness of the lumen becomes wall.
LabelVolume enforce_wall_thickness(const LabelVolume& frame, const PreprocessConfig& cfg);

/// Lipid within the cap thickness of the lumen becomes wall.
LabelVolume enforce_lipid_cap(const LabelVolume& frame, const PreprocessConfig& cfg);

/// Wall near calcium, lipid or lumen becomes inner (5) then outer (6) layer.
LabelVolume build_refinement_layers(const LabelVolume& vol, const PreprocessConfig& cfg);

/// pool -> isolate lumen -> filter -> lipid cap -> wall thickness.
LabelVolume preprocess_frame(const LabelVolume& raw_frame, const PreprocessConfig& cfg,
                             Diagnostics* diag = nullptr);

/// preprocess_frame applied to every slice of a stack of raw frames.
LabelVolume preprocess_stack(const LabelVolume& raw_stack, const PreprocessConfig& cfg,
                             Diagnostics* diag = nullptr);

}  // namespace vox2fea::preprocess
