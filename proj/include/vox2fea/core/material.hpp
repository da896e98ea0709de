#pragma once

#include <string>
#include <variant>

#include "vox2fea/core/types.hpp"

namespace vox2fea {

/// Polynomial strain-energy coefficients; C in kPa, D in 1/kPa.
struct HyperelasticPolynomial {
  double c10 = 0, c01 = 0, c20 = 0, c11 = 0, c30 = 0;
  double d = 0;

  /// Initial shear modulus 2 (C10 + C01), kPa.
  double initial_shear_modulus_kpa() const { return 2.0 * (c10 + c01); }
};

struct LinearElastic {
  double youngs_mpa = 0;
  double poisson = 0;
};

struct MaterialModel {
  std::string name;
  std::variant<HyperelasticPolynomial, LinearElastic> law;

  bool is_hyperelastic() const { return std::holds_alternative<HyperelasticPolynomial>(law); }
  const HyperelasticPolynomial& hyperelastic() const { return std::get<HyperelasticPolynomial>(law); }
  const LinearElastic& linear() const { return std::get<LinearElastic>(law); }

  /// Throws InvalidArgument on non-finite coefficients, D < 0, E <= 0 or
  /// a Poisson ratio outside (0, 0.5).
  void validate() const;
};

/// Small-strain isotropic stand-in for any material: linear cards pass
/// through; polynomial cards use E = 2 mu0 (1 + nu) with mu0 = 2 (C10 + C01).
LinearElastic linearize(const MaterialModel& m, double soft_tissue_poisson = 0.49);

}  // namespace vox2fea
