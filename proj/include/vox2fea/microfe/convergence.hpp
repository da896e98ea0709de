#pragma once

#include <string>
#include <vector>

#include "vox2fea/microfe/solver.hpp"

namespace vox2fea::microfe {

/// Elements whose centroid z lies within half_thickness of z are probed.
struct ProbeSlab {
  double z_um = 0;
  double half_thickness_um = 0;
  auto operator<=>(const ProbeSlab&) const = default;
};

struct ProbePeaks {
  std::size_t samples = 0;  // elements or nodes inside the probe
  double stress_mpa = 0;    // peak von Mises
  double stress_no_calcium_mpa = 0;
  double strain = 0;  // peak max principal strain
  double strain_no_calcium = 0;
};

struct RungResult {
  std::string name;
  std::size_t element_count = 0;
  std::size_t refined_elements = 0;  // inner refinement layer
  std::vector<ProbeSlab> probes;
  std::vector<ProbePeaks> peaks;  // one per probe
};

/// How peaks are read off the element fields. `element` takes the raw
/// constant-per-tet values; `nodal` first averages the stress and strain
/// tensors at every node over the incident tets of each label (volume
/// weighted, never across labels) and probes nodes instead of centroids.
enum class PeakMode { element, nodal };

/// Throws InvalidArgument when a probe holds no element or node.
RungResult measure_rung(std::string name, const TetMesh& mesh, const SolveResult& result,
                        const std::vector<ProbeSlab>& probes, PeakMode mode = PeakMode::element);

/// Percentage errors |x - x_ref| / |x_ref| * 100.
struct ProbeError {
  double stress = 0;
  double stress_no_calcium = 0;
  double strain = 0;
  double strain_no_calcium = 0;
};

struct ConvergenceReport {
  std::vector<RungResult> rungs;
  std::size_t reference = 0;                  // finest rung (most elements)
  std::vector<std::vector<ProbeError>> errors;  // [rung][probe]
  std::vector<ProbeError> mean_errors;          // [rung], averaged over probes
};

/// Errors of every rung against the finest one. Needs at least two rungs
/// measured on identical probes.
ConvergenceReport convergence_report(std::vector<RungResult> rungs);

std::string format_report(const ConvergenceReport& report);
/// One row per rung and probe, comma separated, with a header line.
std::string report_csv(const ConvergenceReport& report);

/// Inner-surface hoop stress of a pressurised thick-walled cylinder.
double lame_hoop_stress(double inner, double outer, double pressure);

struct LameRung {
  int level = 0;
  std::size_t element_count = 0;
  double hoop_kpa = 0;
  double exact_kpa = 0;
  double error_percent = 0;
};

/// Plane-strain tube (a = 1.5 mm, b = 2 mm, p = 15 kPa, nu = 0.3) on a
/// structured mesh refined 2^level times in every direction; the hoop
/// stress is averaged over the tets touching the inner surface.
LameRung solve_lame_cylinder(int level, const SolverOptions& options = {});

}  // namespace vox2fea::microfe
