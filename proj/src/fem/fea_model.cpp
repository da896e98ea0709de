#include "vox2fea/fem/fea_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "vox2fea/mesher/quadratic.hpp"

namespace vox2fea::fem {

void BoundarySpec::validate() const {
  if (!(pressure_kpa > 0)) throw InvalidArgument("pressure must be > 0");
  if (!(endcap_tolerance_um > 0)) throw InvalidArgument("end-cap tolerance must be > 0");
  if (load_surface_name.empty() || endcap_min_name.empty() || endcap_max_name.empty())
    throw InvalidArgument("surface and set names must be non-empty");
}

void FeaModel::validate() const {
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const LabelCode code = mesh.labels[e];
    if (code == label::lumen) throw InvalidArgument("model still contains lumen elements");
    if (!materials.count(code)) throw InvalidArgument(fmt::format("no material for label {}", label_name(code)));
  }
  for (const auto& [code, m] : materials) m.validate();
  if (!(pressure_kpa > 0)) throw InvalidArgument("pressure must be > 0");
  const auto surf = mesh.surfaces.find(load_surface);
  if (surf == mesh.surfaces.end() || surf->second.empty())
    throw InvalidArgument(fmt::format("load surface {} is missing or empty", load_surface));
  for (const auto& name : fixed_node_sets) {
    const auto set = mesh.node_sets.find(name);
    if (set == mesh.node_sets.end() || set->second.empty())
      throw InvalidArgument(fmt::format("node set {} is missing or empty", name));
  }
}

std::vector<FaceRef> extract_lumen_surface(const TetMesh& mesh) {
  if (std::find(mesh.labels.begin(), mesh.labels.end(), label::lumen) == mesh.labels.end())
    throw InvalidArgument("extract_lumen_surface: mesh has no lumen elements");
  const auto adj = build_face_adjacency(mesh);
  std::vector<FaceRef> out;
  for (std::uint32_t e = 0; e < mesh.element_count(); ++e) {
    if (mesh.labels[e] == label::lumen) continue;
    for (std::uint8_t f = 0; f < 4; ++f) {
      const auto nb = adj.neighbour[4 * e + f];
      if (nb != FaceAdjacency::kNone && mesh.labels[nb] == label::lumen) out.push_back({e, f});
    }
  }
  return out;
}

LumenRemoval remove_lumen(const TetMesh& mesh) {
  LumenRemoval r;
  r.element_map.assign(mesh.element_count(), -1);
  r.node_map.assign(mesh.node_count(), -1);
  TetMesh& out = r.mesh;
  out.order = mesh.order;

  std::vector<bool> used(mesh.node_count(), false);
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    if (mesh.labels[e] != label::lumen)
      for (auto n : mesh.element(e)) used[n] = true;
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
    if (used[n]) r.node_map[n] = static_cast<std::int64_t>(out.add_node(mesh.nodes[n]));

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (mesh.labels[e] == label::lumen) continue;
    r.element_map[e] = static_cast<std::int64_t>(out.element_count());
    for (auto n : mesh.element(e)) out.connectivity.push_back(static_cast<std::uint32_t>(r.node_map[n]));
    out.labels.push_back(mesh.labels[e]);
  }
  for (const auto& [name, nodes] : mesh.node_sets) {
    auto& dst = out.node_sets[name];
    for (auto n : nodes)
      if (r.node_map[n] >= 0) dst.push_back(static_cast<std::uint32_t>(r.node_map[n]));
  }
  for (const auto& [name, faces] : mesh.surfaces) {
    auto& dst = out.surfaces[name];
    for (const auto& f : faces)
      if (r.element_map[f.element] >= 0) dst.push_back({static_cast<std::uint32_t>(r.element_map[f.element]), f.face});
  }
  return r;
}

EndcapSets find_endcap_nodes(const TetMesh& mesh, const BoundarySpec& spec) {
  spec.validate();
  if (mesh.node_count() == 0) throw InvalidArgument("find_endcap_nodes: empty mesh");
  double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
  for (const auto& p : mesh.nodes) {
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  EndcapSets s;
  for (std::uint32_t n = 0; n < mesh.node_count(); ++n) {
    const double z = mesh.nodes[n].z();
    if (std::abs(z - zmin) <= spec.endcap_tolerance_um) s.zmin.push_back(n);
    if (std::abs(z - zmax) <= spec.endcap_tolerance_um) s.zmax.push_back(n);
  }
  if (s.zmin.empty() || s.zmax.empty()) throw InvalidArgument("find_endcap_nodes: an end-cap set is empty");
  return s;
}

std::map<LabelCode, MaterialModel> material_cards() {
  HyperelasticPolynomial wall;
  wall.c10 = 127.9;
  wall.d = 0.096;
  HyperelasticPolynomial lipid;
  lipid.c10 = 1.6;
  lipid.c20 = 9.3;
  lipid.c30 = 11.0;
  const MaterialModel wall_card{"WALL", wall};
  return {{label::wall, wall_card},
          {label::lipid, {"LIPID", lipid}},
          {label::calcium, {"CALCIUM", LinearElastic{184.0, 0.495}}},
          {label::inner_refine, wall_card},
          {label::outer_refine, wall_card}};
}

FeaModel build_fea_model(const TetMesh& mesh_with_lumen, const BoundarySpec& spec, ElementOrder order,
                         const std::map<LabelCode, MaterialModel>& materials) {
  spec.validate();
  if (mesh_with_lumen.order != ElementOrder::linear) throw InvalidArgument("build_fea_model: linear mesh expected");
  TetMesh mesh = mesh_with_lumen;
  mesh.surfaces[spec.load_surface_name] = extract_lumen_surface(mesh);
  FeaModel model;
  model.mesh = remove_lumen(mesh).mesh;
  if (order == ElementOrder::quadratic) model.mesh = mesher::to_quadratic(model.mesh);
  const auto caps = find_endcap_nodes(model.mesh, spec);
  model.mesh.node_sets[spec.endcap_min_name] = caps.zmin;
  model.mesh.node_sets[spec.endcap_max_name] = caps.zmax;
  for (auto code : model.mesh.labels)
    if (!model.materials.count(code)) {
      const auto it = materials.find(code);
      if (it == materials.end()) throw InvalidArgument(fmt::format("no material for label {}", label_name(code)));
      model.materials.insert(*it);
    }
  model.pressure_kpa = spec.pressure_kpa;
  model.load_surface = spec.load_surface_name;
  model.fixed_node_sets = {spec.endcap_min_name, spec.endcap_max_name};
  model.validate();
  return model;
}

}  // namespace vox2fea::fem
