#include "vox2fea/core/material.hpp"

#include <cmath>

#include <fmt/core.h>

namespace vox2fea {

void MaterialModel::validate() const {
  if (is_hyperelastic()) {
    const auto& h = hyperelastic();
    for (double v : {h.c10, h.c01, h.c20, h.c11, h.c30, h.d}) {
      if (!std::isfinite(v)) throw InvalidArgument(fmt::format("material {}: non-finite coefficient", name));
    }
    if (h.d < 0) throw InvalidArgument(fmt::format("material {}: D must be >= 0", name));
  } else {
    const auto& l = linear();
    if (!(l.youngs_mpa > 0) || !std::isfinite(l.youngs_mpa))
      throw InvalidArgument(fmt::format("material {}: E must be > 0", name));
    if (!(l.poisson > 0 && l.poisson < 0.5))
      throw InvalidArgument(fmt::format("material {}: Poisson ratio must lie in (0, 0.5)", name));
  }
}

LinearElastic linearize(const MaterialModel& m, double soft_tissue_poisson) {
  if (!m.is_hyperelastic()) return m.linear();
  const double mu_mpa = m.hyperelastic().initial_shear_modulus_kpa() * 1e-3;
  return {2.0 * mu_mpa * (1.0 + soft_tissue_poisson), soft_tissue_poisson};
}

}  // namespace vox2fea
