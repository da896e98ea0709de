#include "vox2fea/microfe/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "vox2fea/mesher/structured.hpp"

namespace vox2fea::microfe {

namespace {

struct Sample {
  double z = 0;
  LabelCode code = 0;
  double von_mises = 0;
  double principal = 0;
};

std::vector<Sample> element_samples(const TetMesh& mesh, const SolveResult& result) {
  std::vector<Sample> out(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    out[e] = {tet_centroid(mesh, e).z(), mesh.labels[e], result.von_mises_mpa[e], result.max_principal_strain[e]};
  return out;
}

std::vector<Sample> nodal_samples(const TetMesh& mesh, const SolveResult& result) {
  struct Acc {
    double weight = 0;
    Eigen::Matrix3d stress = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d strain = Eigen::Matrix3d::Zero();
  };
  std::vector<std::map<LabelCode, Acc>> acc(mesh.node_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double w = std::abs(tet_volume(mesh, e));
    for (auto n : mesh.corners(e)) {
      auto& a = acc[n][mesh.labels[e]];
      a.weight += w;
      a.stress += w * result.stress_mpa[e];
      a.strain += w * result.strain[e];
    }
  }
  std::vector<Sample> out;
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
    for (const auto& [code, a] : acc[n]) {
      const Eigen::Matrix3d strain = a.strain / a.weight;
      out.push_back({mesh.nodes[n].z(), code, von_mises(a.stress / a.weight),
                     Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(strain, Eigen::EigenvaluesOnly).eigenvalues()(2)});
    }
  return out;
}

}  // namespace

RungResult measure_rung(std::string name, const TetMesh& mesh, const SolveResult& result,
                        const std::vector<ProbeSlab>& probes, PeakMode mode) {
  if (result.von_mises_mpa.size() != mesh.element_count())
    throw InvalidArgument("measure_rung: result does not match the mesh");
  RungResult r;
  r.name = std::move(name);
  r.element_count = mesh.element_count();
  r.refined_elements = static_cast<std::size_t>(std::count(mesh.labels.begin(), mesh.labels.end(), label::inner_refine));
  r.probes = probes;
  r.peaks.resize(probes.size());
  const auto samples = mode == PeakMode::element ? element_samples(mesh, result) : nodal_samples(mesh, result);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    auto& pk = r.peaks[p];
    for (const auto& s : samples) {
      if (std::abs(s.z - probes[p].z_um) > probes[p].half_thickness_um) continue;
      ++pk.samples;
      pk.stress_mpa = std::max(pk.stress_mpa, s.von_mises);
      pk.strain = std::max(pk.strain, s.principal);
      if (s.code != label::calcium) {
        pk.stress_no_calcium_mpa = std::max(pk.stress_no_calcium_mpa, s.von_mises);
        pk.strain_no_calcium = std::max(pk.strain_no_calcium, s.principal);
      }
    }
    if (pk.samples == 0) throw InvalidArgument(fmt::format("measure_rung: probe at z = {} um is empty", probes[p].z_um));
  }
  return r;
}

namespace {

double percent(double x, double ref) { return ref != 0 ? std::abs(x - ref) / std::abs(ref) * 100.0 : (x == 0 ? 0 : 100.0); }

}  // namespace

ConvergenceReport convergence_report(std::vector<RungResult> rungs) {
  if (rungs.size() < 2) throw InvalidArgument("convergence_report: at least two rungs required");
  for (const auto& r : rungs) {
    if (r.probes != rungs.front().probes || r.peaks.size() != r.probes.size())
      throw InvalidArgument("convergence_report: rungs use different probe definitions");
  }
  if (rungs.front().probes.empty()) throw InvalidArgument("convergence_report: no probes");
  ConvergenceReport rep;
  rep.rungs = std::move(rungs);
  for (std::size_t i = 1; i < rep.rungs.size(); ++i)
    if (rep.rungs[i].element_count > rep.rungs[rep.reference].element_count) rep.reference = i;
  const auto& ref = rep.rungs[rep.reference];
  const std::size_t np = ref.probes.size();
  for (const auto& r : rep.rungs) {
    std::vector<ProbeError> row(np);
    ProbeError mean;
    for (std::size_t p = 0; p < np; ++p) {
      row[p].stress = percent(r.peaks[p].stress_mpa, ref.peaks[p].stress_mpa);
      row[p].stress_no_calcium = percent(r.peaks[p].stress_no_calcium_mpa, ref.peaks[p].stress_no_calcium_mpa);
      row[p].strain = percent(r.peaks[p].strain, ref.peaks[p].strain);
      row[p].strain_no_calcium = percent(r.peaks[p].strain_no_calcium, ref.peaks[p].strain_no_calcium);
      mean.stress += row[p].stress / np;
      mean.stress_no_calcium += row[p].stress_no_calcium / np;
      mean.strain += row[p].strain / np;
      mean.strain_no_calcium += row[p].strain_no_calcium / np;
    }
    rep.errors.push_back(std::move(row));
    rep.mean_errors.push_back(mean);
  }
  return rep;
}

std::string format_report(const ConvergenceReport& rep) {
  std::string out = fmt::format("reference rung: {}\n", rep.rungs[rep.reference].name);
  out += fmt::format("{:<12} {:>9} {:>9} {:>10} {:>12} {:>9} {:>9} {:>9} {:>9}\n", "rung", "elements", "refined",
                     "probe_z_um", "peak_vm_kPa", "err_vm%", "err_vm%nc", "err_ep%", "err_ep%nc");
  for (std::size_t r = 0; r < rep.rungs.size(); ++r) {
    const auto& rung = rep.rungs[r];
    for (std::size_t p = 0; p < rung.probes.size(); ++p) {
      const auto& e = rep.errors[r][p];
      out += fmt::format("{:<12} {:>9} {:>9} {:>10.1f} {:>12.3f} {:>9.2f} {:>9.2f} {:>9.2f} {:>9.2f}\n", rung.name,
                         rung.element_count, rung.refined_elements, rung.probes[p].z_um,
                         rung.peaks[p].stress_mpa * 1000.0, e.stress, e.stress_no_calcium, e.strain,
                         e.strain_no_calcium);
    }
    const auto& m = rep.mean_errors[r];
    out += fmt::format("{:<12} {:>9} {:>9} {:>10} {:>12} {:>9.2f} {:>9.2f} {:>9.2f} {:>9.2f}\n", rung.name, "", "",
                       "mean", "", m.stress, m.stress_no_calcium, m.strain, m.strain_no_calcium);
  }
  return out;
}

std::string report_csv(const ConvergenceReport& rep) {
  std::string out =
      "rung,elements,refined_elements,probe_z_um,peak_von_mises_mpa,peak_von_mises_no_calcium_mpa,"
      "peak_principal_strain,peak_principal_strain_no_calcium,err_stress_pct,err_stress_no_calcium_pct,"
      "err_strain_pct,err_strain_no_calcium_pct\n";
  for (std::size_t r = 0; r < rep.rungs.size(); ++r) {
    const auto& rung = rep.rungs[r];
    for (std::size_t p = 0; p < rung.probes.size(); ++p) {
      const auto& pk = rung.peaks[p];
      const auto& e = rep.errors[r][p];
      out += fmt::format("{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.6g},{:.6g},{:.6g},{:.6g}\n", rung.name,
                         rung.element_count, rung.refined_elements, rung.probes[p].z_um, pk.stress_mpa,
                         pk.stress_no_calcium_mpa, pk.strain, pk.strain_no_calcium, e.stress, e.stress_no_calcium,
                         e.strain, e.strain_no_calcium);
    }
  }
  return out;
}

double lame_hoop_stress(double a, double b, double p) { return p * (a * a + b * b) / (b * b - a * a); }

LameRung solve_lame_cylinder(int level, const SolverOptions& options) {
  if (level < 0 || level > 4) throw InvalidArgument("solve_lame_cylinder: level must be in [0, 4]");
  constexpr double a = 1500.0, b = 2000.0, p_kpa = 15.0;
  const int k = 1 << level;
  const double length = 250.0;
  const TetMesh mesh = mesher::structured_annulus(a, b, length, 2 * k, 32 * k, k);

  const double tol = 1e-6 * a;
  auto on_inner = [&](std::uint32_t n) { return std::abs(mesh.nodes[n].head<2>().norm() - a) < tol; };
  const auto adj = build_face_adjacency(mesh);
  std::vector<FaceRef> inner;
  std::vector<bool> touches_inner(mesh.element_count(), false);
  for (const auto& f : boundary_faces(mesh, adj)) {
    const auto n = mesh.face_nodes(f);
    if (on_inner(n[0]) && on_inner(n[1]) && on_inner(n[2])) {
      inner.push_back(f);
      touches_inner[f.element] = true;
    }
  }

  // Plane strain: caps held axially; symmetry planes x = 0 and y = 0 remove
  // the in-plane rigid modes.
  std::vector<DirichletBC> bcs;
  for (std::uint32_t n = 0; n < mesh.node_count(); ++n) {
    const Vec3& q = mesh.nodes[n];
    if (std::abs(q.z()) < tol || std::abs(q.z() - length) < tol) bcs.push_back({n, 2, 0.0});
    if (std::abs(q.x()) < tol) bcs.push_back({n, 0, 0.0});
    if (std::abs(q.y()) < tol) bcs.push_back({n, 1, 0.0});
  }
  const MaterialTable materials{{label::wall, LinearElastic{1.0, 0.3}}};
  const auto system = assemble(mesh, materials, {PressureLoad{inner, p_kpa / 1000.0}});
  const auto result = solve(mesh, materials, system, bcs, options);

  double sum = 0;
  std::size_t count = 0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!touches_inner[e]) continue;
    const Vec3 c = tet_centroid(mesh, e);
    const Vec3 t = Vec3(-c.y(), c.x(), 0).normalized();
    sum += t.dot(result.stress_mpa[e] * t);
    ++count;
  }
  LameRung r;
  r.level = level;
  r.element_count = mesh.element_count();
  r.hoop_kpa = sum / static_cast<double>(count) * 1000.0;
  r.exact_kpa = lame_hoop_stress(a, b, p_kpa);
  r.error_percent = percent(r.hoop_kpa, r.exact_kpa);
  return r;
}

}  // namespace vox2fea::microfe
