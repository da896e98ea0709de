#include "vox2fea/mesher/sizing.hpp"

#include <fmt/core.h>

namespace vox2fea::mesher {

SizingField SizingField::from_inner(double inner) {
  SizingField s;
  s.max_tet_volume_by_label = {{label::inner_refine, inner}, {label::outer_refine, 2.0 * inner}};
  s.default_max_volume = 8.0 * inner;
  return s;
}

double SizingField::max_volume(LabelCode code) const {
  const auto it = max_tet_volume_by_label.find(code);
  return it == max_tet_volume_by_label.end() ? default_max_volume : it->second;
}

void SizingField::validate() const {
  if (!(default_max_volume > 0)) throw InvalidArgument("sizing: global volume must be > 0");
  for (const auto& [code, v] : max_tet_volume_by_label)
    if (!(v > 0)) throw InvalidArgument(fmt::format("sizing: volume for label {} must be > 0", code));
  const double inner = max_volume(label::inner_refine);
  const double outer = max_volume(label::outer_refine);
  if (inner > outer) throw InvalidArgument("sizing: inner layer volume exceeds outer layer volume");
  for (int c = 0; c < label::count; ++c) {
    const auto code = static_cast<LabelCode>(c);
    if (code == label::inner_refine || code == label::outer_refine || code == label::background) continue;
    if (outer > max_volume(code))
      throw InvalidArgument(fmt::format("sizing: outer layer volume exceeds volume for label {}", c));
  }
}

}  // namespace vox2fea::mesher
