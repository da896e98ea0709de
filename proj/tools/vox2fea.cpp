#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "vox2fea/core/labelmap_io.hpp"
#include "vox2fea/mesher/quality.hpp"
#include "vox2fea/mesher/vtk_io.hpp"
#include "vox2fea/pipeline/phantom.hpp"
#include "vox2fea/pipeline/pipeline.hpp"

using namespace vox2fea;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kStage = 3;

void print_quality(const mesher::QualityReport& q) {
  fmt::print("elements            {}\n", q.element_count);
  fmt::print("nodes               {}\n", q.node_count);
  fmt::print("min dihedral (deg)  {:.3f}\n", q.min_dihedral_deg);
  fmt::print("median dihedral     {:.3f}\n", q.median_dihedral_deg);
  fmt::print("inverted            {}\n", q.inverted_count);
  fmt::print("non-conformal faces {}\n", q.nonconformal_faces);
  fmt::print("dangling faces      {}\n", q.dangling_faces);
  for (const auto& [code, n] : q.label_counts) {
    fmt::print("  {:<13} {:>8} tets", label_name(code), n);
    if (q.hausdorff_voxels.count(code)) fmt::print("  hausdorff {:.3f} vx", q.hausdorff_voxels.at(code));
    if (q.volume_error.count(code)) fmt::print("  volume error {:+.2f}%", 100 * q.volume_error.at(code));
    fmt::print("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Labelled OCT frames to graded tetrahedral FE models"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);

  std::string kind = "annulus", stem;
  pipeline::PhantomParams pp;
  auto* phantom = app.add_subcommand("phantom", "Write a synthetic labelled pullback");
  phantom->add_option("--kind", kind, "annulus | eccentric-lipid | calcified-nodule | convergence-region");
  phantom->add_option("--out", stem, "Output stem (<stem>.json, <stem>.raw, <stem>.truth.json)")->required();
  phantom->add_option("--frames", pp.frames, "Frame count")->check(CLI::PositiveNumber);
  phantom->add_option("--pixel-um", pp.pixel_um, "Pixel size");
  phantom->add_option("--frame-spacing-um", pp.frame_spacing_um, "Distance between frames");
  phantom->add_option("--width-px", pp.width_px, "Frame side (0 = automatic)");
  std::vector<double> lumen_um, outer_um;
  phantom->add_option("--lumen-um", lumen_um, "Lumen radius at first and last frame")->expected(2);
  phantom->add_option("--outer-um", outer_um, "Outer radius at first and last frame")->expected(2);
  phantom->add_option("--lipid-cap-um", pp.lipid_cap_um, "Tissue between lipid and lumen");
  phantom->add_option("--thin-sector-deg", pp.thin_sector_deg, "Angular span of a thin-wall sector");
  phantom->add_flag("--specks", pp.specks, "Add small lipid and calcium specks");

  int rungs = 3;
  auto* converge = app.add_subcommand("converge", "Mesh-convergence study on linear tets");
  converge->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
  converge->add_option("--rungs", rungs, "Number of sizing rungs")->check(CLI::Range(2, 64));

  std::string mesh_path, reference_path;
  auto* validate = app.add_subcommand("validate", "Quality and validity report of a VTK mesh");
  validate->add_option("mesh", mesh_path, "Legacy VTK tetrahedral mesh")->required()->check(CLI::ExistingFile);
  validate->add_option("--reference", reference_path, "Labelmap for Hausdorff and volume checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("vox2fea"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*run) {
      const auto cfg = pipeline::load_config(config_path);
      const auto r = pipeline::run_pipeline(cfg);
      fmt::print("wrote {} ({} stages run, {} cached)\n", r.inp_path.string(), r.executed_stages.size(),
                 r.cached_stages.size());
      print_quality(r.quality);
    } else if (*phantom) {
      if (lumen_um.size() == 2) std::copy(lumen_um.begin(), lumen_um.end(), pp.lumen_radius_um);
      if (outer_um.size() == 2) std::copy(outer_um.begin(), outer_um.end(), pp.outer_radius_um);
      const auto ph = pipeline::generate_phantom(pipeline::parse_phantom_kind(kind), pp);
      for (const auto& p : pipeline::write_phantom(ph, stem)) fmt::print("{}\n", p.string());
    } else if (*converge) {
      const auto cfg = pipeline::load_config(config_path);
      const auto r = pipeline::run_convergence(cfg, rungs);
      fmt::print("{}", microfe::format_report(r.report));
    } else if (*validate) {
      const auto mesh = mesher::read_vtk(mesh_path);
      std::optional<LabelVolume> ref;
      if (!reference_path.empty()) ref = load_label_volume(reference_path);
      const auto q = mesher::validate_mesh(mesh, ref ? &*ref : nullptr);
      print_quality(q);
      if (!q.valid()) {
        fmt::print(stderr, "mesh is not valid\n");
        return kValidation;
      }
    }
  } catch (const pipeline::ValidationFailure& e) {
    spdlog::error("{}", e.what());
    return kValidation;
  } catch (const pipeline::StageError& e) {
    spdlog::error("{}", e.what());
    for (const auto& a : e.trail()) spdlog::error("  written: {}", a);
    return kStage;
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kStage;
  }
  return kOk;
}
