#pragma once

#include <map>
#include <span>
#include <vector>

#include "vox2fea/core/diagnostics.hpp"
#include "vox2fea/core/distance.hpp"
#include "vox2fea/core/label_volume.hpp"

namespace vox2fea::interpolate {

/// Axial layout of the frames and the target isotropic spacing.
struct InterpolationPlan {
  std::vector<double> frame_z_um;  // strictly increasing
  double target_spacing_um = 20;

  /// Steps across gap `i` (frame i to i+1): round(gap / target), >= 1.
  int slices_between(std::size_t gap) const;
  /// Output slice index of every frame.
  std::vector<int> frame_slice_indices() const;
  void validate() const;

  static InterpolationPlan uniform(std::size_t frame_count, double gap_um, double target_spacing_um);
};

/// Labels morphed between frames, in tie-break priority order.
inline constexpr std::array<LabelCode, 4> kPriority{label::calcium, label::lipid, label::lumen,
                                                    label::wall};

/// Per-label binary masks of one slice.
struct MultiMaskSlice {
  Dims dims;
  Spacing spacing;
  std::map<LabelCode, std::vector<std::uint8_t>> masks;
};

/// Components of one label matched across a frame pair: the union of the
/// grouped components on each side.
struct ComponentGroup {
  LabelCode code = label::background;
  std::vector<std::uint8_t> mask_a;
  std::vector<std::uint8_t> mask_b;
};

/// Seeds for components that have no counterpart in the other frame.
struct SeededPair {
  LabelVolume frame_a;
  LabelVolume frame_b;
  std::vector<std::array<int, 2>> seeds_in_a;  // (x, y)
  std::vector<std::array<int, 2>> seeds_in_b;
};

/// For every component of `code` present in one frame while the label is
/// absent from the other, place one voxel of `code` in the lacking frame at
/// the component's rounded centroid.
SeededPair seed_artificial_label(const LabelVolume& frame_a, const LabelVolume& frame_b,
                                 LabelCode code, Diagnostics* diag = nullptr);

/// Components matched by largest overlap, falling back to nearest centroid;
/// linked components form one group. Unmatched components are paired with a
/// one-voxel seed at their centroid.
std::vector<ComponentGroup> match_components(const LabelVolume& frame_a, const LabelVolume& frame_b,
                                             LabelCode code, Diagnostics* diag = nullptr);

/// { (1 - t) f_a + t f_b <= 0 }.
std::vector<std::uint8_t> interpolate_component_pair(const DistanceField& field_a,
                                                     const DistanceField& field_b, double t);

/// Every voxel of `region` (all voxels when empty) takes the label of the
/// nearest mask; ties go to calcium, lipid, lumen, wall in that order.
/// Voxels outside the region are background.
LabelVolume expand_labels(const MultiMaskSlice& slice, std::span<const std::uint8_t> region = {});

/// Voxels outside the section mask become background.
LabelVolume crop_to_mask(const LabelVolume& frame, std::span<const std::uint8_t> section_mask);

/// Isotropic volume from preprocessed frames; original frames are copied
/// verbatim to their slice positions.
LabelVolume interpolate_pullback(const std::vector<LabelVolume>& frames, const InterpolationPlan& plan,
                                 Diagnostics* diag = nullptr);

/// Same, for a stack whose slices are frames spaced by spacing().z.
LabelVolume interpolate_pullback(const LabelVolume& frame_stack, double target_spacing_um,
                                 Diagnostics* diag = nullptr);

}  // namespace vox2fea::interpolate
