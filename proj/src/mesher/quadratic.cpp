#include "vox2fea/mesher/quadratic.hpp"

#include <unordered_map>

namespace vox2fea::mesher {

TetMesh to_quadratic(const TetMesh& mesh) {
  if (mesh.order == ElementOrder::quadratic) throw InvalidArgument("to_quadratic: mesh is already quadratic");
  TetMesh out;
  out.nodes = mesh.nodes;
  out.labels = mesh.labels;
  out.node_sets = mesh.node_sets;
  out.surfaces = mesh.surfaces;
  out.order = ElementOrder::quadratic;
  out.connectivity.reserve(mesh.element_count() * 10);

  std::unordered_map<std::uint64_t, std::uint32_t> midside;
  midside.reserve(mesh.element_count() * 2);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto c = mesh.corners(e);
    out.connectivity.insert(out.connectivity.end(), c.begin(), c.end());
    for (const auto& edge : kTetEdges) {
      std::uint32_t a = c[edge[0]], b = c[edge[1]];
      if (a > b) std::swap(a, b);
      const auto key = (static_cast<std::uint64_t>(a) << 32) | b;
      auto it = midside.find(key);
      if (it == midside.end()) {
        it = midside.emplace(key, out.add_node((mesh.nodes[a] + mesh.nodes[b]) / 2.0)).first;
      }
      out.connectivity.push_back(it->second);
    }
  }
  return out;
}

}  // namespace vox2fea::mesher
