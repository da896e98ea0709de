#include "vox2fea/microfe/assembly.hpp"

#include <cmath>

#include <Eigen/LU>
#include <fmt/core.h>

namespace vox2fea::microfe {

MaterialTable linearize_materials(const std::map<LabelCode, MaterialModel>& cards, double soft_tissue_poisson) {
  MaterialTable out;
  for (const auto& [code, card] : cards) out[code] = linearize(card, soft_tissue_poisson);
  return out;
}

Eigen::Matrix<double, 6, 6> elasticity_matrix(const LinearElastic& m) {
  const double e = m.youngs_mpa, nu = m.poisson;
  const double lambda = e * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = e / (2 * (1 + nu));
  Eigen::Matrix<double, 6, 6> d = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d(i, j) = lambda;
    d(i, i) = lambda + 2 * mu;
    d(i + 3, i + 3) = mu;
  }
  return d;
}

Eigen::Matrix<double, 6, 12> strain_displacement(const std::array<Vec3, 4>& p, double* volume_mm3) {
  Eigen::Matrix4d m;
  for (int k = 0; k < 4; ++k) m.row(k) << 1.0, p[k].x(), p[k].y(), p[k].z();
  const double det = m.determinant();
  const double vol = det / 6.0;
  const double scale = std::max({(p[1] - p[0]).norm(), (p[2] - p[0]).norm(), (p[3] - p[0]).norm()});
  if (!(std::abs(vol) > 1e-12 * scale * scale * scale)) throw ComputationError("degenerate element (zero volume)");
  // Rows 1..3 of inv(m) hold the shape-function gradients.
  const Eigen::Matrix4d inv = m.inverse();
  Eigen::Matrix<double, 6, 12> b = Eigen::Matrix<double, 6, 12>::Zero();
  for (int k = 0; k < 4; ++k) {
    const double dx = inv(1, k), dy = inv(2, k), dz = inv(3, k);
    const int c = 3 * k;
    b(0, c) = dx;
    b(1, c + 1) = dy;
    b(2, c + 2) = dz;
    b(3, c) = dy;
    b(3, c + 1) = dx;
    b(4, c + 1) = dz;
    b(4, c + 2) = dy;
    b(5, c) = dz;
    b(5, c + 2) = dx;
  }
  if (volume_mm3) *volume_mm3 = std::abs(vol);
  return b;
}

Eigen::VectorXd pressure_load_vector(const TetMesh& mesh, const PressureLoad& load) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(mesh.node_count()));
  for (const auto& face : load.faces) {
    const double area_mm2 = face_area(mesh, face) / (kUmPerMm * kUmPerMm);
    const Vec3 force = -load.pressure_mpa * area_mm2 / 3.0 * outward_face_normal(mesh, face);
    for (auto n : mesh.face_nodes(face)) f.segment<3>(3 * n) += force;
  }
  return f;
}

LinearSystem assemble(const TetMesh& mesh, const MaterialTable& materials, const std::vector<PressureLoad>& loads) {
  if (mesh.order != ElementOrder::linear) throw InvalidArgument("assemble: linear tets only");
  const auto ndof = 3 * static_cast<Eigen::Index>(mesh.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.element_count() * 144);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto it = materials.find(mesh.labels[e]);
    if (it == materials.end())
      throw InvalidArgument(fmt::format("assemble: no material for label {}", label_name(mesh.labels[e])));
    auto p = mesh.corner_points(e);
    for (auto& q : p) q /= kUmPerMm;
    double vol = 0;
    Eigen::Matrix<double, 6, 12> b;
    try {
      b = strain_displacement(p, &vol);
    } catch (const ComputationError&) {
      throw ComputationError(fmt::format("assemble: element {} is degenerate (zero volume)", e));
    }
    Eigen::Matrix<double, 12, 12> ke = vol * b.transpose() * elasticity_matrix(it->second) * b;
    // Mirror the upper triangle so the global matrix is exactly symmetric.
    ke.triangularView<Eigen::StrictlyLower>() = ke.transpose().triangularView<Eigen::StrictlyLower>();
    const auto c = mesh.corners(e);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int a = 0; a < 3; ++a)
          for (int bb = 0; bb < 3; ++bb)
            triplets.emplace_back(3 * c[i] + a, 3 * c[j] + bb, ke(3 * i + a, 3 * j + bb));
  }
  LinearSystem sys;
  sys.stiffness.resize(ndof, ndof);
  sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  sys.load = Eigen::VectorXd::Zero(ndof);
  for (const auto& l : loads) sys.load += pressure_load_vector(mesh, l);
  return sys;
}

}  // namespace vox2fea::microfe
