#include "vox2fea/pipeline/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "vox2fea/core/labelmap_io.hpp"
#include "vox2fea/fem/inp_writer.hpp"
#include "vox2fea/interpolate/interpolate.hpp"
#include "vox2fea/mesher/lattice_mesher.hpp"
#include "vox2fea/mesher/optimize.hpp"
#include "vox2fea/mesher/quadratic.hpp"
#include "vox2fea/mesher/vtk_io.hpp"
#include "vox2fea/microfe/solver.hpp"

namespace fs = std::filesystem;

namespace vox2fea::pipeline {

StageError::StageError(std::string stage, const std::string& cause, std::vector<std::string> trail)
    : Error(fmt::format("stage '{}' failed: {}", stage, cause)), stage_(std::move(stage)), trail_(std::move(trail)) {}

std::string quality_json(const mesher::QualityReport& q) {
  nlohmann::ordered_json j;
  j["element_count"] = q.element_count;
  j["node_count"] = q.node_count;
  j["min_dihedral_deg"] = q.min_dihedral_deg;
  j["median_dihedral_deg"] = q.median_dihedral_deg;
  j["inverted_count"] = q.inverted_count;
  j["nonconformal_faces"] = q.nonconformal_faces;
  j["dangling_faces"] = q.dangling_faces;
  auto per_label = [](const auto& m) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [code, v] : m) o[label_name(code)] = v;
    return o;
  };
  j["label_counts"] = per_label(q.label_counts);
  j["label_volumes_um3"] = per_label(q.label_volumes_um3);
  j["hausdorff_voxels"] = per_label(q.hausdorff_voxels);
  j["volume_error"] = per_label(q.volume_error);
  return j.dump(2) + "\n";
}

std::vector<microfe::ProbeSlab> default_probes(const LabelVolume& vol, const ConvergenceConfig& cfg) {
  std::vector<microfe::ProbeSlab> out;
  for (double z : cfg.probe_z_um) out.push_back({z, cfg.probe_half_thickness_um});
  if (!out.empty()) return out;
  const int nz = vol.dims().nz;
  for (int k : vol.frame_positions)
    if (k > 0 && k < nz - 1) out.push_back({k * vol.spacing().z, cfg.probe_half_thickness_um});
  if (out.empty()) out.push_back({0.5 * (nz - 1) * vol.spacing().z, cfg.probe_half_thickness_um});
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError(fmt::format("cannot write {}", path.string()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot read {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

mesher::QualityReport quality_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  mesher::QualityReport q;
  q.element_count = j.at("element_count");
  q.node_count = j.at("node_count");
  q.min_dihedral_deg = j.at("min_dihedral_deg");
  q.median_dihedral_deg = j.at("median_dihedral_deg");
  q.inverted_count = j.at("inverted_count");
  q.nonconformal_faces = j.at("nonconformal_faces");
  q.dangling_faces = j.at("dangling_faces");
  for (LabelCode c = 0; c <= label::outer_refine; ++c) {
    const auto name = label_name(c);
    if (j.at("label_counts").contains(name)) q.label_counts[c] = j["label_counts"][name];
    if (j.at("label_volumes_um3").contains(name)) q.label_volumes_um3[c] = j["label_volumes_um3"][name];
    if (j.at("hausdorff_voxels").contains(name)) q.hausdorff_voxels[c] = j["hausdorff_voxels"][name];
    if (j.at("volume_error").contains(name)) q.volume_error[c] = j["volume_error"][name];
  }
  return q;
}

std::string input_key(const fs::path& input) {
  const auto stem = labelmap_stem(input);
  return sha256_hex(sha256_file(fs::path(stem.string() + ".json")) + sha256_file(fs::path(stem.string() + ".raw")));
}

class Runner {
 public:
  Runner(const PipelineConfig& cfg, std::string manifest_name)
      : cfg_(cfg), root_(cfg.output_dir), manifest_path_(root_ / manifest_name) {
    fs::create_directories(root_);
    previous_ = Manifest::load(manifest_path_);
    std::string all;
    for (const char* s : {"input", "preprocess", "interpolate", "sizing", "mesher", "optimize", "boundary", "export",
                          "solver", "stages", "convergence", "run"})
      all += fmt::format("[{}]\n{}", s, cfg.section_text(s));
    current_.config_sha256 = sha256_hex(all);
  }

  const fs::path& root() const { return root_; }
  fs::path path(const std::string& name) const { return root_ / name; }

  static std::string chain(const std::string& prev, const std::string& what) { return sha256_hex(prev + "\n" + what); }
  std::string section_key(const std::string& prev, const std::string& section) const {
    return chain(prev, fmt::format("[{}]\n{}", section, cfg_.section_text(section)));
  }

  /// Reuses the previous record when its key matches and files are intact.
  bool reuse(const std::string& stage, const std::string& key) {
    if (!previous_) return false;
    const StageRecord* rec = previous_->find(stage);
    if (rec == nullptr || rec->key != key || !artifacts_intact(root_, *rec)) return false;
    current_.stages.push_back(*rec);
    cached_.push_back(stage);
    spdlog::info("{}: cached", stage);
    return true;
  }

  void record(const std::string& stage, const std::string& key, const std::vector<fs::path>& files) {
    StageRecord rec{stage, key, {}};
    for (const auto& f : files) rec.artifacts.push_back(make_record(root_, f));
    current_.stages.push_back(std::move(rec));
    executed_.push_back(stage);
  }

  /// Runs `body`, turning failures into StageError after saving what exists.
  template <typename F>
  void guard(const std::string& stage, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const ValidationFailure&) {
      save();
      throw;
    } catch (const std::exception& e) {
      save();
      throw StageError(stage, e.what(), trail());
    }
    spdlog::info("{}: {:.2f} s", stage,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  std::vector<std::string> trail() const {
    std::vector<std::string> out;
    for (const auto& s : current_.stages)
      for (const auto& a : s.artifacts) out.push_back(a.path);
    return out;
  }

  void save() const { current_.save(manifest_path_); }
  const Manifest& manifest() const { return current_; }
  const std::vector<std::string>& cached() const { return cached_; }
  const std::vector<std::string>& executed() const { return executed_; }

 private:
  const PipelineConfig& cfg_;
  fs::path root_;
  fs::path manifest_path_;
  std::optional<Manifest> previous_;
  Manifest current_;
  std::vector<std::string> cached_;
  std::vector<std::string> executed_;
};

std::vector<fs::path> save_volume(const LabelVolume& vol, const fs::path& stem) {
  const auto [json, raw] = save_label_volume(vol, stem);
  return {json, raw};
}

/// preprocess -> interpolate -> layers; returns the layered volume and the
/// key of the last stage.
std::pair<LabelVolume, std::string> volume_stages(const PipelineConfig& cfg, Runner& run, Diagnostics& diag) {
  std::string key;
  run.guard("input", [&] {
    if (!fs::exists(fs::path(labelmap_stem(cfg.input).string() + ".json")))
      throw InvalidArgument(fmt::format("input labelmap {} not found", cfg.input.string()));
    key = input_key(cfg.input);
  });

  LabelVolume pre;
  key = run.section_key(key, "preprocess");
  run.guard("preprocess", [&] {
    const auto stem = run.path("preprocessed");
    if (run.reuse("preprocess", key)) {
      pre = load_label_volume(stem);
      return;
    }
    pre = preprocess::preprocess_stack(load_label_volume(cfg.input), cfg.preprocess, &diag);
    run.record("preprocess", key, save_volume(pre, stem));
  });

  LabelVolume iso;
  key = run.section_key(key, "interpolate");
  run.guard("interpolate", [&] {
    const auto stem = run.path("interpolated");
    if (run.reuse("interpolate", key)) {
      iso = load_label_volume(stem);
      return;
    }
    iso = interpolate::interpolate_pullback(pre, cfg.target_spacing_um, &diag);
    run.record("interpolate", key, save_volume(iso, stem));
  });

  LabelVolume layered;
  key = run.section_key(key, "preprocess");
  run.guard("layers", [&] {
    const auto stem = run.path("labels");
    if (run.reuse("layers", key)) {
      layered = load_label_volume(stem);
      return;
    }
    layered = preprocess::build_refinement_layers(iso, cfg.preprocess);
    run.record("layers", key, save_volume(layered, stem));
  });
  return {std::move(layered), key};
}

TetMesh mesh_and_optimize(const LabelVolume& vol, const PipelineConfig& cfg, Diagnostics& diag) {
  auto mesh = mesher::generate_tet_mesh(vol, cfg.sizing.field(), cfg.mesher, &diag);
  if (!cfg.run_optimize) return mesh;
  auto oc = cfg.optimize;
  oc.voxel_um = vol.spacing().x;
  return mesher::optimize_mesh(mesh, oc).first;
}

void check_valid(const mesher::QualityReport& q) {
  if (q.inverted_count > 0 || q.nonconformal_faces > 0 || q.dangling_faces > 0)
    throw ValidationFailure(fmt::format("mesh validation failed: {} inverted, {} non-conformal, {} dangling faces",
                                        q.inverted_count, q.nonconformal_faces, q.dangling_faces));
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  Runner run(cfg, "manifest.json");
  Diagnostics diag;
  RunResult result;
  auto [vol, key] = volume_stages(cfg, run, diag);

  TetMesh mesh;
  key = run.section_key(run.section_key(key, "sizing"), "mesher");
  run.guard("mesh", [&] {
    const auto path = run.path("mesh_raw.vtk");
    if (run.reuse("mesh", key)) {
      mesh = mesher::read_vtk(path);
      return;
    }
    mesh = mesher::generate_tet_mesh(vol, cfg.sizing.field(), cfg.mesher, &diag);
    mesher::write_vtk(mesh, path);
    run.record("mesh", key, {path});
  });

  key = run.section_key(run.section_key(key, "optimize"), "stages");
  run.guard("optimize", [&] {
    const auto mesh_path = run.path("mesh.vtk");
    const auto quality_path = run.path("quality.json");
    if (run.reuse("optimize", key)) {
      mesh = mesher::read_vtk(mesh_path);
      result.quality = quality_from_json(read_text(quality_path));
    } else {
      if (cfg.run_optimize) {
        auto oc = cfg.optimize;
        oc.voxel_um = vol.spacing().x;
        mesh = mesher::optimize_mesh(mesh, oc).first;
      }
      result.quality = mesher::validate_mesh(mesh, &vol);
      mesher::write_vtk(mesh, mesh_path);
      write_text(quality_path, quality_json(result.quality));
      run.record("optimize", key, {mesh_path, quality_path});
    }
    spdlog::info("mesh: {} elements, min dihedral {:.2f} deg, max Hausdorff {:.2f} voxels", result.quality.element_count,
                 result.quality.min_dihedral_deg, result.quality.max_hausdorff_voxels());
    check_valid(result.quality);
  });

  const std::string mesh_key = key;
  key = run.section_key(run.section_key(key, "boundary"), "export");
  run.guard("export", [&] {
    result.inp_path = run.path("model.inp");
    if (run.reuse("export", key)) return;
    const auto model = fem::build_fea_model(mesh, cfg.boundary, cfg.element_order, fem::material_cards());
    fem::write_inp(model, result.inp_path, cfg.inp);
    run.record("export", key, {result.inp_path});
  });

  if (cfg.run_verify) {
    key = run.section_key(run.section_key(mesh_key, "boundary"), "solver");
    run.guard("verify", [&] {
      const auto path = run.path("microfe.json");
      if (run.reuse("verify", key)) return;
      const auto model = fem::build_fea_model(mesh, cfg.boundary, ElementOrder::linear, fem::material_cards());
      const auto res = microfe::solve_model(model, cfg.solver, cfg.soft_tissue_poisson);
      Eigen::Vector3d applied = Eigen::Vector3d::Zero(), reaction = Eigen::Vector3d::Zero();
      const auto load = microfe::pressure_load_vector(
          model.mesh, {model.mesh.surfaces.at(model.load_surface), model.pressure_kpa / 1000.0});
      for (std::size_t n = 0; n < model.mesh.node_count(); ++n) {
        applied += load.segment<3>(3 * n);
        reaction += res.reaction_n.segment<3>(3 * n);
      }
      nlohmann::ordered_json j;
      j["elements"] = model.mesh.element_count();
      j["iterations"] = res.iterations;
      j["relative_residual"] = res.relative_residual;
      j["peak_von_mises_kpa"] = res.peak_von_mises_mpa * 1000.0;
      j["peak_stress_element"] = res.peak_stress_element + 1;
      j["peak_principal_strain"] = res.peak_principal_strain;
      j["peak_strain_element"] = res.peak_strain_element + 1;
      j["max_displacement_um"] = res.displacement_mm.cwiseAbs().maxCoeff() * 1000.0;
      j["force_balance"] = (applied + reaction).norm() / std::max(load.cwiseAbs().sum(), 1e-300);
      write_text(path, j.dump(2) + "\n");
      run.record("verify", key, {path});
    });
  }

  run.save();
  result.manifest = run.manifest();
  result.executed_stages = run.executed();
  result.cached_stages = run.cached();
  result.warnings = diag.warnings;
  for (const auto& w : diag.warnings) spdlog::warn("{}", w);
  return result;
}

namespace {

nlohmann::ordered_json rung_to_json(const microfe::RungResult& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["element_count"] = r.element_count;
  j["refined_elements"] = r.refined_elements;
  j["probes"] = nlohmann::ordered_json::array();
  for (std::size_t p = 0; p < r.probes.size(); ++p) {
    const auto& pk = r.peaks[p];
    j["probes"].push_back({{"z_um", r.probes[p].z_um},
                           {"half_thickness_um", r.probes[p].half_thickness_um},
                           {"samples", pk.samples},
                           {"stress_mpa", pk.stress_mpa},
                           {"stress_no_calcium_mpa", pk.stress_no_calcium_mpa},
                           {"strain", pk.strain},
                           {"strain_no_calcium", pk.strain_no_calcium}});
  }
  return j;
}

microfe::RungResult rung_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  microfe::RungResult r;
  r.name = j.at("name");
  r.element_count = j.at("element_count");
  r.refined_elements = j.at("refined_elements");
  for (const auto& p : j.at("probes")) {
    r.probes.push_back({p.at("z_um"), p.at("half_thickness_um")});
    r.peaks.push_back({p.at("samples"), p.at("stress_mpa"), p.at("stress_no_calcium_mpa"), p.at("strain"),
                       p.at("strain_no_calcium")});
  }
  return r;
}

}  // namespace

ConvergenceRun run_convergence(const PipelineConfig& cfg, int rungs) {
  cfg.validate();
  if (rungs < 2 || rungs > static_cast<int>(cfg.convergence.inner_volumes.size()))
    throw InvalidArgument(fmt::format("converge: rungs must be in [2, {}] (convergence.inner_volumes)",
                                      cfg.convergence.inner_volumes.size()));
  Runner run(cfg, "converge_manifest.json");
  Diagnostics diag;
  auto [vol, base_key] = volume_stages(cfg, run, diag);
  const auto probes = default_probes(vol, cfg.convergence);

  std::string shared = base_key;
  for (const char* s : {"sizing", "mesher", "optimize", "stages", "boundary", "solver", "convergence"})
    shared = run.section_key(shared, s);

  std::vector<microfe::RungResult> results;
  for (int i = 0; i < rungs; ++i) {
    const double v = cfg.convergence.inner_volumes[i];
    const std::string stage = fmt::format("rung{}", i);
    const std::string key = Runner::chain(shared, fmt::format("inner_max_volume = {}", v));
    run.guard(stage, [&] {
      const auto path = run.path(stage + ".json");
      if (run.reuse(stage, key)) {
        results.push_back(rung_from_json(read_text(path)));
        return;
      }
      PipelineConfig rc = cfg;
      rc.sizing = SizingConfig{v, 0, 0};
      const auto mesh = mesh_and_optimize(vol, rc, diag);
      check_valid(mesher::validate_mesh(mesh));
      const auto model = fem::build_fea_model(mesh, cfg.boundary, ElementOrder::linear, fem::material_cards());
      const auto res = microfe::solve_model(model, cfg.solver, cfg.soft_tissue_poisson);
      spdlog::info("{}: V = {} voxels^3, {} elements, {} CG iterations", stage, v, model.mesh.element_count(),
                   res.iterations);
      results.push_back(microfe::measure_rung(fmt::format("V{}", v), model.mesh, res, probes));
      write_text(path, rung_to_json(results.back()).dump(2) + "\n");
      run.record(stage, key, {path});
    });
  }

  ConvergenceRun out;
  run.guard("report", [&] {
    out.report = microfe::convergence_report(results);
    const auto txt = run.path("convergence.txt");
    const auto csv = run.path("convergence.csv");
    write_text(txt, microfe::format_report(out.report));
    write_text(csv, microfe::report_csv(out.report));
    run.record("report", Runner::chain(shared, "report"), {txt, csv});
  });
  run.save();
  out.manifest = run.manifest();
  out.cached_stages = run.cached();
  for (const auto& w : diag.warnings) spdlog::warn("{}", w);
  return out;
}

}  // namespace vox2fea::pipeline
