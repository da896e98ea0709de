#pragma once

#include <map>

#include "vox2fea/core/types.hpp"

namespace vox2fea::mesher {

/// Upper bound on tet volume per label, in cubic voxels.
struct SizingField {
  std::map<LabelCode, double> max_tet_volume_by_label;
  double default_max_volume = 8 * 2.83;

  /// inner layer = `inner`, outer layer = 2x, everything else 8x.
  static SizingField from_inner(double inner_max_volume = 2.83);

  double max_volume(LabelCode code) const;
  /// All volumes > 0 and inner <= outer <= every other label.
  void validate() const;
};

}  // namespace vox2fea::mesher
