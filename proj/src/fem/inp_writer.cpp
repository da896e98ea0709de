#include "vox2fea/fem/inp_writer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace vox2fea::fem {

namespace {

constexpr double kUmPerMm = 1000.0;
constexpr double kKpaPerMpa = 1000.0;
constexpr int kPerLine = 16;

// 15 significant digits hides the noise of the unit conversions (9.3 kPa
// prints as 0.0093); always carries a decimal point or exponent.
std::string num(double v) {
  std::string s = fmt::format("{:.15g}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += '.';
  return s;
}

template <typename It>
void id_lines(It out, const std::vector<std::uint32_t>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    fmt::format_to(out, "{}{}", ids[i] + 1, (i + 1) % kPerLine == 0 || i + 1 == ids.size() ? "\n" : ", ");
  }
}

}  // namespace

std::string elset_name(LabelCode code) {
  std::string s = label_name(code);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string format_inp(const FeaModel& model, const InpOptions& options) {
  model.validate();
  const TetMesh& mesh = model.mesh;
  std::string text;
  auto out = std::back_inserter(text);

  fmt::format_to(out, "*HEADING\n{}\n** units: mm, tonne, s, MPa\n", options.heading);

  fmt::format_to(out, "*NODE\n");
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    const Vec3 p = mesh.nodes[n] / kUmPerMm;
    fmt::format_to(out, "{}, {}, {}, {}\n", n + 1, num(p.x()), num(p.y()), num(p.z()));
  }

  const bool quadratic = mesh.order == ElementOrder::quadratic;
  fmt::format_to(out, "*ELEMENT, TYPE={}{}\n", quadratic ? "C3D10" : "C3D4", options.hybrid ? "H" : "");
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    fmt::format_to(out, "{}", e + 1);
    for (auto n : mesh.element(e)) fmt::format_to(out, ", {}", n + 1);
    text.push_back('\n');
  }

  std::set<LabelCode> present(mesh.labels.begin(), mesh.labels.end());
  for (LabelCode code : present) {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t e = 0; e < mesh.element_count(); ++e)
      if (mesh.labels[e] == code) ids.push_back(e);
    fmt::format_to(out, "*ELSET, ELSET={}\n", elset_name(code));
    id_lines(out, ids);
  }

  fmt::format_to(out, "*SURFACE, TYPE=ELEMENT, NAME={}\n", model.load_surface);
  for (const auto& f : mesh.surfaces.at(model.load_surface))
    fmt::format_to(out, "{}, S{}\n", f.element + 1, f.face + 1);

  for (const auto& name : model.fixed_node_sets) {
    fmt::format_to(out, "*NSET, NSET={}\n", name);
    id_lines(out, mesh.node_sets.at(name));
  }

  std::set<std::string> card_names;
  for (LabelCode code : present) {
    const auto& m = model.materials.at(code);
    fmt::format_to(out, "*SOLID SECTION, ELSET={}, MATERIAL={}\n,\n", elset_name(code), m.name);
    card_names.insert(m.name);
  }
  for (const auto& name : card_names) {
    const auto it = std::find_if(model.materials.begin(), model.materials.end(),
                                 [&](const auto& kv) { return kv.second.name == name; });
    const MaterialModel& m = it->second;
    fmt::format_to(out, "*MATERIAL, NAME={}\n", name);
    if (m.is_hyperelastic()) {
      const auto& h = m.hyperelastic();
      const double d1 = h.d * kKpaPerMpa;  // 1/kPa -> 1/MPa
      fmt::format_to(out, "*HYPERELASTIC, POLYNOMIAL, N=3\n");
      fmt::format_to(out, "{}, {}, {}, {}, {}, {}, {}, {}\n", num(h.c10 / kKpaPerMpa), num(h.c01 / kKpaPerMpa),
                     num(h.c20 / kKpaPerMpa), num(h.c11 / kKpaPerMpa), num(0.0), num(h.c30 / kKpaPerMpa), num(0.0),
                     num(0.0));
      fmt::format_to(out, "{}, {}, {}, {}\n", num(0.0), num(d1), num(0.0), num(0.0));
    } else {
      fmt::format_to(out, "*ELASTIC\n{}, {}\n", num(m.linear().youngs_mpa), num(m.linear().poisson));
    }
  }

  fmt::format_to(out, "*BOUNDARY\n");
  for (const auto& name : model.fixed_node_sets) fmt::format_to(out, "{}, 1, 3\n", name);

  fmt::format_to(out, "*STEP, NLGEOM=YES\n*STATIC\n*DSLOAD\n{}, P, {}\n*END STEP\n", model.load_surface,
                 num(model.pressure_kpa / kKpaPerMpa));
  return text;
}

void write_inp(const FeaModel& model, const std::filesystem::path& path, const InpOptions& options) {
  const std::string text = format_inp(model, options);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", path.string()));
  f << text;
  if (!f) throw Error(fmt::format("write failed: {}", path.string()));
}

}  // namespace vox2fea::fem
