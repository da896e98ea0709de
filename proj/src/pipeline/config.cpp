#include "vox2fea/pipeline/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>
#include <fmt/format.h>

namespace vox2fea::pipeline {

mesher::SizingField SizingConfig::field() const {
  auto f = mesher::SizingField::from_inner(inner_max_volume);
  if (outer_max_volume > 0) f.max_tet_volume_by_label[label::outer_refine] = outer_max_volume;
  if (default_max_volume > 0) f.default_max_volume = default_max_volume;
  return f;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw InvalidArgument(fmt::format("config: {} expects a number, got '{}'", key, v));
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != static_cast<int>(x)) throw InvalidArgument(fmt::format("config: {} expects an integer, got '{}'", key, v));
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, std::string v) {
  boost::algorithm::to_lower(v);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw InvalidArgument(fmt::format("config: {} expects true/false, got '{}'", key, v));
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, v, boost::is_any_of(", "), boost::token_compress_on);
  std::vector<double> out;
  for (auto& p : parts)
    if (!p.empty()) out.push_back(to_double(key, p));
  return out;
}

std::string num(double x) { return fmt::format("{}", x); }
std::string flag(bool b) { return b ? "true" : "false"; }
std::string list(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double x : v) s.push_back(num(x));
  return boost::algorithm::join(s, ", ");
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(PipelineConfig&, const std::string&, const std::filesystem::path&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define V2F_NUM(SEC, NAME, FIELD)                                                                             \
  Key {                                                                                                       \
    SEC, NAME, [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {                   \
      c.FIELD = to_double(SEC "." NAME, v);                                                                   \
    },                                                                                                        \
        [](const PipelineConfig& c) { return num(c.FIELD); }                                                  \
  }
#define V2F_INT(SEC, NAME, FIELD)                                                                             \
  Key {                                                                                                       \
    SEC, NAME, [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {                   \
      c.FIELD = to_int(SEC "." NAME, v);                                                                      \
    },                                                                                                        \
        [](const PipelineConfig& c) { return num(c.FIELD); }                                                  \
  }
#define V2F_BOOL(SEC, NAME, FIELD)                                                                            \
  Key {                                                                                                       \
    SEC, NAME, [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {                   \
      c.FIELD = to_bool(SEC "." NAME, v);                                                                     \
    },                                                                                                        \
        [](const PipelineConfig& c) { return flag(c.FIELD); }                                                 \
  }
#define V2F_STR(SEC, NAME, FIELD)                                                                             \
  Key {                                                                                                       \
    SEC, NAME, [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) { c.FIELD = v; },   \
        [](const PipelineConfig& c) { return c.FIELD; }                                                       \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      Key{"input", "labelmap",
          [](PipelineConfig& c, const std::string& v, const std::filesystem::path& base) {
            c.input = std::filesystem::path(v).is_absolute() ? std::filesystem::path(v) : base / v;
          },
          [](const PipelineConfig& c) { return c.input.filename().string(); }},
      Key{"output", "dir",
          [](PipelineConfig& c, const std::string& v, const std::filesystem::path& base) {
            c.output_dir = std::filesystem::path(v).is_absolute() ? std::filesystem::path(v) : base / v;
          },
          [](const PipelineConfig&) { return std::string(); }},
      V2F_NUM("preprocess", "min_component_area_px", preprocess.min_component_area_px),
      V2F_NUM("preprocess", "min_wall_thickness_um", preprocess.min_wall_thickness_um),
      V2F_NUM("preprocess", "lipid_cap_thickness_um", preprocess.lipid_cap_thickness_um),
      V2F_NUM("preprocess", "inner_refine_radius_um", preprocess.inner_refine_radius_um),
      V2F_NUM("preprocess", "outer_refine_radius_um", preprocess.outer_refine_radius_um),
      V2F_NUM("interpolate", "target_spacing_um", target_spacing_um),
      V2F_NUM("sizing", "inner_max_volume", sizing.inner_max_volume),
      V2F_NUM("sizing", "outer_max_volume", sizing.outer_max_volume),
      V2F_NUM("sizing", "default_max_volume", sizing.default_max_volume),
      V2F_NUM("mesher", "fill_factor", mesher.fill_factor),
      V2F_INT("mesher", "interface_level", mesher.interface_level),
      V2F_INT("mesher", "junction_level", mesher.junction_level),
      V2F_BOOL("mesher", "refine_small_features", mesher.refine_small_features),
      V2F_BOOL("mesher", "snap_interfaces", mesher.snap_interfaces),
      V2F_INT("mesher", "snap_sweeps", mesher.snap_sweeps),
      V2F_NUM("mesher", "snap_min_dihedral_deg", mesher.snap_min_dihedral_deg),
      V2F_NUM("optimize", "target_min_dihedral_deg", optimize.target_min_dihedral_deg),
      V2F_NUM("optimize", "max_interface_shift_voxels", optimize.max_interface_shift_voxels),
      V2F_INT("optimize", "max_passes", optimize.max_passes),
      V2F_BOOL("optimize", "flips", optimize.flips),
      V2F_NUM("boundary", "pressure_kpa", boundary.pressure_kpa),
      V2F_NUM("boundary", "endcap_tolerance_um", boundary.endcap_tolerance_um),
      V2F_STR("boundary", "load_surface", boundary.load_surface_name),
      V2F_STR("boundary", "endcap_min", boundary.endcap_min_name),
      V2F_STR("boundary", "endcap_max", boundary.endcap_max_name),
      Key{"export", "element_order",
          [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
            if (v == "linear") c.element_order = ElementOrder::linear;
            else if (v == "quadratic") c.element_order = ElementOrder::quadratic;
            else throw InvalidArgument(fmt::format("config: export.element_order must be linear or quadratic, got '{}'", v));
          },
          [](const PipelineConfig& c) {
            return std::string(c.element_order == ElementOrder::linear ? "linear" : "quadratic");
          }},
      V2F_BOOL("export", "hybrid", inp.hybrid),
      V2F_STR("export", "heading", inp.heading),
      V2F_NUM("solver", "tolerance", solver.tolerance),
      V2F_INT("solver", "max_iterations", solver.max_iterations),
      V2F_NUM("solver", "soft_tissue_poisson", soft_tissue_poisson),
      V2F_BOOL("stages", "optimize", run_optimize),
      V2F_BOOL("stages", "verify", run_verify),
      Key{"convergence", "inner_volumes",
          [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
            c.convergence.inner_volumes = to_list("convergence.inner_volumes", v);
          },
          [](const PipelineConfig& c) { return list(c.convergence.inner_volumes); }},
      Key{"convergence", "probe_z_um",
          [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
            c.convergence.probe_z_um = to_list("convergence.probe_z_um", v);
          },
          [](const PipelineConfig& c) { return list(c.convergence.probe_z_um); }},
      V2F_NUM("convergence", "probe_half_thickness_um", convergence.probe_half_thickness_um),
      Key{"run", "seed",
          [](PipelineConfig& c, const std::string& v, const std::filesystem::path&) {
            const double x = to_double("run.seed", v);
            if (x < 0 || x != std::floor(x)) throw InvalidArgument("config: run.seed must be a non-negative integer");
            c.seed = static_cast<std::uint64_t>(x);
          },
          [](const PipelineConfig& c) { return fmt::format("{}", c.seed); }},
  };
  return table;
}

#undef V2F_NUM
#undef V2F_INT
#undef V2F_BOOL
#undef V2F_STR

}  // namespace

void PipelineConfig::validate() const {
  if (input.empty()) throw InvalidArgument("config: input.labelmap is required");
  if (output_dir.empty()) throw InvalidArgument("config: output.dir is required");
  preprocess.validate();
  if (!(target_spacing_um > 0)) throw InvalidArgument("config: interpolate.target_spacing_um must be > 0");
  sizing.field().validate();
  if (!(mesher.fill_factor > 0 && mesher.fill_factor <= 1)) throw InvalidArgument("config: mesher.fill_factor must be in (0, 1]");
  if (mesher.snap_sweeps < 0) throw InvalidArgument("config: mesher.snap_sweeps must be >= 0");
  if (!(optimize.max_interface_shift_voxels >= 0 && optimize.max_interface_shift_voxels <= 0.5))
    throw InvalidArgument("config: optimize.max_interface_shift_voxels must be in [0, 0.5]");
  if (optimize.max_passes < 0) throw InvalidArgument("config: optimize.max_passes must be >= 0");
  boundary.validate();
  if (!(solver.tolerance > 0)) throw InvalidArgument("config: solver.tolerance must be > 0");
  if (solver.max_iterations < 1) throw InvalidArgument("config: solver.max_iterations must be >= 1");
  if (!(soft_tissue_poisson > 0 && soft_tissue_poisson < 0.5))
    throw InvalidArgument("config: solver.soft_tissue_poisson must be in (0, 0.5)");
  if (convergence.inner_volumes.empty()) throw InvalidArgument("config: convergence.inner_volumes is empty");
  for (double v : convergence.inner_volumes)
    if (!(v > 0)) throw InvalidArgument("config: convergence.inner_volumes must be > 0");
  if (!(convergence.probe_half_thickness_um > 0))
    throw InvalidArgument("config: convergence.probe_half_thickness_um must be > 0");
}

std::string PipelineConfig::section_text(const std::string& section) const {
  std::string out;
  for (const auto& k : keys())
    if (k.section == section) out += fmt::format("{} = {}\n", k.name, k.get(*this));
  return out;
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument(fmt::format("config: {} (line {})", e.message(), e.line()));
  }
  PipelineConfig cfg;
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty())
      throw InvalidArgument(fmt::format("config: key '{}' outside any section", section));
    for (const auto& [name, value] : entries) {
      const auto it = std::find_if(keys().begin(), keys().end(),
                                   [&](const Key& k) { return k.section == section && k.name == name; });
      if (it == keys().end()) throw InvalidArgument(fmt::format("config: unknown key {}.{}", section, name));
      it->set(cfg, boost::algorithm::trim_copy(value.data()), base_dir);
    }
  }
  cfg.optimize.voxel_um = cfg.target_spacing_um;
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("config: cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

}  // namespace vox2fea::pipeline
