#include "vox2fea/microfe/solver.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <fmt/core.h>

namespace vox2fea::microfe {

std::vector<DirichletBC> fix_nodes(const std::vector<std::uint32_t>& nodes) {
  std::vector<DirichletBC> out;
  out.reserve(nodes.size() * 3);
  for (auto n : nodes)
    for (int d = 0; d < 3; ++d) out.push_back({n, d, 0.0});
  return out;
}

double von_mises(const Eigen::Matrix3d& s) {
  const double a = s(0, 0) - s(1, 1), b = s(1, 1) - s(2, 2), c = s(2, 2) - s(0, 0);
  return std::sqrt(0.5 * (a * a + b * b + c * c) + 3 * (s(0, 1) * s(0, 1) + s(1, 2) * s(1, 2) + s(2, 0) * s(2, 0)));
}

void recover_fields(const TetMesh& mesh, const MaterialTable& materials, SolveResult& r) {
  const std::size_t ne = mesh.element_count();
  r.strain.resize(ne);
  r.stress_mpa.resize(ne);
  r.von_mises_mpa.resize(ne);
  r.max_principal_strain.resize(ne);
  r.peak_von_mises_mpa = -1;
  r.peak_principal_strain = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < ne; ++e) {
    auto p = mesh.corner_points(e);
    for (auto& q : p) q /= kUmPerMm;
    const auto b = strain_displacement(p, nullptr);
    Eigen::Matrix<double, 12, 1> ue;
    const auto c = mesh.corners(e);
    for (int k = 0; k < 4; ++k) ue.segment<3>(3 * k) = r.displacement_mm.segment<3>(3 * c[k]);
    const Eigen::Matrix<double, 6, 1> eps = b * ue;
    const Eigen::Matrix<double, 6, 1> sig = elasticity_matrix(materials.at(mesh.labels[e])) * eps;
    Eigen::Matrix3d strain;
    strain << eps(0), eps(3) / 2, eps(5) / 2, eps(3) / 2, eps(1), eps(4) / 2, eps(5) / 2, eps(4) / 2, eps(2);
    Eigen::Matrix3d stress;
    stress << sig(0), sig(3), sig(5), sig(3), sig(1), sig(4), sig(5), sig(4), sig(2);
    r.strain[e] = strain;
    r.stress_mpa[e] = stress;
    r.von_mises_mpa[e] = von_mises(stress);
    r.max_principal_strain[e] = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(strain, Eigen::EigenvaluesOnly).eigenvalues()(2);
    if (r.von_mises_mpa[e] > r.peak_von_mises_mpa) {
      r.peak_von_mises_mpa = r.von_mises_mpa[e];
      r.peak_stress_element = e;
    }
    if (r.max_principal_strain[e] > r.peak_principal_strain) {
      r.peak_principal_strain = r.max_principal_strain[e];
      r.peak_strain_element = e;
    }
  }
}

namespace {

template <typename Solver>
Eigen::VectorXd run_cg(Solver& cg, const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                       const SolverOptions& options, SolveResult& r) {
  cg.setTolerance(options.tolerance);
  cg.setMaxIterations(options.max_iterations);
  cg.compute(a);
  if (cg.info() != Eigen::Success) throw ComputationError("solve: preconditioner setup failed (singular system?)");
  Eigen::VectorXd x = cg.solve(b);
  r.iterations = static_cast<int>(cg.iterations());
  r.relative_residual = b.norm() > 0 ? (b - a * x).norm() / b.norm() : (a * x).norm();
  if (cg.info() != Eigen::Success || !(r.relative_residual <= options.tolerance * 1.01))
    throw ComputationError(fmt::format("solve: CG did not converge ({} iterations, residual {:.3g})", r.iterations,
                                       r.relative_residual));
  return x;
}

}  // namespace

SolveResult solve(const TetMesh& mesh, const MaterialTable& materials, const LinearSystem& system,
                  const std::vector<DirichletBC>& bcs, const SolverOptions& options) {
  const Eigen::Index ndof = system.stiffness.rows();
  if (ndof != 3 * static_cast<Eigen::Index>(mesh.node_count()) || system.load.size() != ndof)
    throw InvalidArgument("solve: system size does not match the mesh");

  Eigen::VectorXd fixed_value = Eigen::VectorXd::Zero(ndof);
  std::vector<bool> constrained(static_cast<std::size_t>(ndof), false);
  for (const auto& bc : bcs) {
    if (bc.node >= mesh.node_count() || bc.dof < 0 || bc.dof > 2) throw InvalidArgument("solve: bad boundary condition");
    constrained[3 * bc.node + bc.dof] = true;
    fixed_value(3 * bc.node + bc.dof) = bc.value_mm;
  }
  std::vector<Eigen::Index> free_index(static_cast<std::size_t>(ndof), -1);
  Eigen::Index nfree = 0;
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (!constrained[i]) free_index[i] = nfree++;

  // Reduced system K_ff u_f = f_f - K_fc u_c.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(system.stiffness.nonZeros()));
  for (Eigen::Index col = 0; col < ndof; ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.stiffness, col); it; ++it) {
      const auto row = it.row();
      if (constrained[row]) continue;
      if (constrained[col]) rhs(free_index[row]) -= it.value() * fixed_value(col);
      else trip.emplace_back(free_index[row], free_index[col], it.value());
    }
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (!constrained[i]) rhs(free_index[i]) += system.load(i);
  Eigen::SparseMatrix<double> kff(nfree, nfree);
  kff.setFromTriplets(trip.begin(), trip.end());
  for (Eigen::Index i = 0; i < nfree; ++i)
    if (!(kff.coeff(i, i) > 0)) throw ComputationError("solve: singular system (free DOF without stiffness)");

  SolveResult r;
  Eigen::VectorXd uf = Eigen::VectorXd::Zero(nfree);
  if (nfree > 0 && rhs.norm() > 0) {
    if (options.preconditioner == Preconditioner::diagonal) {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      uf = run_cg(cg, kff, rhs, options, r);
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                               Eigen::IncompleteCholesky<double>>
          cg;
      uf = run_cg(cg, kff, rhs, options, r);
    }
  }
  r.displacement_mm = fixed_value;
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (!constrained[i]) r.displacement_mm(i) = uf(free_index[i]);
  r.reaction_n = system.stiffness * r.displacement_mm - system.load;
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (!constrained[i]) r.reaction_n(i) = 0;
  recover_fields(mesh, materials, r);
  return r;
}

SolveResult solve_model(const fem::FeaModel& model, const SolverOptions& options, double soft_tissue_poisson) {
  model.validate();
  const auto materials = linearize_materials(model.materials, soft_tissue_poisson);
  const PressureLoad load{model.mesh.surfaces.at(model.load_surface), model.pressure_kpa / 1000.0};
  const auto system = assemble(model.mesh, materials, {load});
  std::vector<std::uint32_t> fixed;
  for (const auto& name : model.fixed_node_sets) {
    const auto& set = model.mesh.node_sets.at(name);
    fixed.insert(fixed.end(), set.begin(), set.end());
  }
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  return solve(model.mesh, materials, system, fix_nodes(fixed), options);
}

}  // namespace vox2fea::microfe
