#pragma once

#include <vector>

#include <Eigen/Core>

#include "vox2fea/fem/fea_model.hpp"
#include "vox2fea/microfe/assembly.hpp"

namespace vox2fea::microfe {

/// Prescribed displacement (mm) of one DOF (0 = x, 1 = y, 2 = z).
struct DirichletBC {
  std::uint32_t node = 0;
  int dof = 0;
  double value_mm = 0;
};

/// All three DOFs of each node held at zero.
std::vector<DirichletBC> fix_nodes(const std::vector<std::uint32_t>& nodes);

enum class Preconditioner { diagonal, incomplete_cholesky };

struct SolverOptions {
  /// Relative residual |b - A x| / |b| of the reduced system.
  double tolerance = 1e-8;
  int max_iterations = 20000;
  Preconditioner preconditioner = Preconditioner::diagonal;
};

struct SolveResult {
  Eigen::VectorXd displacement_mm;  // 3 per node
  Eigen::VectorXd reaction_n;       // K u - f; non-zero only on constrained DOFs
  std::vector<Eigen::Matrix3d> strain;
  std::vector<Eigen::Matrix3d> stress_mpa;
  std::vector<double> von_mises_mpa;
  std::vector<double> max_principal_strain;
  double peak_von_mises_mpa = 0;
  std::size_t peak_stress_element = 0;
  double peak_principal_strain = 0;
  std::size_t peak_strain_element = 0;
  int iterations = 0;
  double relative_residual = 0;
};

/// Preconditioned CG on the free DOFs (constrained DOFs eliminated), then
/// per-element strain, stress, von Mises and principal strain. Throws
/// ComputationError when CG does not reach the tolerance or the reduced
/// system is singular.
SolveResult solve(const TetMesh& mesh, const MaterialTable& materials, const LinearSystem& system,
                  const std::vector<DirichletBC>& bcs, const SolverOptions& options = {});

/// Element strains and stresses for a given displacement field.
void recover_fields(const TetMesh& mesh, const MaterialTable& materials, SolveResult& result);

double von_mises(const Eigen::Matrix3d& stress);

/// Linearised solve of an exported model: pressure on the load surface,
/// fixed end caps.
SolveResult solve_model(const fem::FeaModel& model, const SolverOptions& options = {},
                        double soft_tissue_poisson = 0.49);

}  // namespace vox2fea::microfe
