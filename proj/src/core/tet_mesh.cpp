#include "vox2fea/core/tet_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vox2fea {

void TetMesh::add_tet(std::array<std::uint32_t, 4> c, LabelCode code) {
  connectivity.insert(connectivity.end(), c.begin(), c.end());
  labels.push_back(code);
}

std::array<std::uint32_t, 3> TetMesh::face_nodes(FaceRef f) const {
  const auto el = element(f.element);
  const auto& local = kTetFaces[f.face];
  return {el[local[0]], el[local[1]], el[local[2]]};
}

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

double tet_volume(const TetMesh& mesh, std::size_t e) {
  const auto p = mesh.corner_points(e);
  return signed_volume(p[0], p[1], p[2], p[3]);
}

Vec3 tet_centroid(const TetMesh& mesh, std::size_t e) {
  const auto p = mesh.corner_points(e);
  return (p[0] + p[1] + p[2] + p[3]) / 4.0;
}

std::array<double, 6> dihedral_angles_deg(const Vec3& a, const Vec3& b, const Vec3& c,
                                          const Vec3& d) {
  const std::array<Vec3, 4> p{a, b, c, d};
  // Outward normal of the face opposite each corner.
  std::array<Vec3, 4> n;
  for (int k = 0; k < 4; ++k) {
    const auto& f = kTetFaces[std::find(kFaceOpposite.begin(), kFaceOpposite.end(), k) - kFaceOpposite.begin()];
    Vec3 nn = (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]);
    if (nn.dot(p[k] - p[f[0]]) > 0) nn = -nn;
    const double len = nn.norm();
    n[k] = len > 0 ? Vec3(nn / len) : Vec3::Zero();
  }
  std::array<double, 6> out{};
  for (int i = 0; i < 6; ++i) {
    const int u = kTetEdges[i][0], v = kTetEdges[i][1];
    int others[2], m = 0;
    for (int k = 0; k < 4; ++k)
      if (k != u && k != v) others[m++] = k;
    const double cosang = std::clamp(-n[others[0]].dot(n[others[1]]), -1.0, 1.0);
    out[i] = std::acos(cosang) * 180.0 / std::numbers::pi;
  }
  return out;
}

double min_dihedral_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const auto ang = dihedral_angles_deg(a, b, c, d);
  const double m = *std::min_element(ang.begin(), ang.end());
  const double vol = signed_volume(a, b, c, d);
  const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (d - a).squaredNorm(),
                                 (c - b).squaredNorm(), (d - b).squaredNorm(), (d - c).squaredNorm()});
  if (!(vol > 1e-14 * std::pow(scale, 1.5))) return -1.0 - m;
  return m;
}

Vec3 outward_face_normal(const TetMesh& mesh, FaceRef f) {
  const auto el = mesh.element(f.element);
  const auto& local = kTetFaces[f.face];
  const Vec3& a = mesh.nodes[el[local[0]]];
  const Vec3& b = mesh.nodes[el[local[1]]];
  const Vec3& c = mesh.nodes[el[local[2]]];
  const Vec3& opp = mesh.nodes[el[kFaceOpposite[f.face]]];
  Vec3 n = (b - a).cross(c - a);
  if (n.dot(opp - a) > 0) n = -n;
  return n.normalized();
}

double face_area(const TetMesh& mesh, FaceRef f) {
  const auto fn = mesh.face_nodes(f);
  return 0.5 * (mesh.nodes[fn[1]] - mesh.nodes[fn[0]]).cross(mesh.nodes[fn[2]] - mesh.nodes[fn[0]]).norm();
}

Vec3 face_centroid(const TetMesh& mesh, FaceRef f) {
  const auto fn = mesh.face_nodes(f);
  return (mesh.nodes[fn[0]] + mesh.nodes[fn[1]] + mesh.nodes[fn[2]]) / 3.0;
}

namespace {
struct FaceKey {
  std::array<std::uint32_t, 3> nodes;
  std::uint32_t element;
  std::uint8_t face;
};
}  // namespace

FaceAdjacency build_face_adjacency(const TetMesh& mesh) {
  const std::size_t ne = mesh.element_count();
  std::vector<FaceKey> keys;
  keys.reserve(ne * 4);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto c = mesh.corners(e);
    for (std::uint8_t f = 0; f < 4; ++f) {
      std::array<std::uint32_t, 3> k{c[kTetFaces[f][0]], c[kTetFaces[f][1]], c[kTetFaces[f][2]]};
      std::sort(k.begin(), k.end());
      keys.push_back({k, static_cast<std::uint32_t>(e), f});
    }
  }
  std::sort(keys.begin(), keys.end(), [](const FaceKey& a, const FaceKey& b) {
    if (a.nodes != b.nodes) return a.nodes < b.nodes;
    return std::tie(a.element, a.face) < std::tie(b.element, b.face);
  });

  FaceAdjacency adj;
  adj.neighbour.assign(ne * 4, FaceAdjacency::kNone);
  adj.neighbour_face.assign(ne * 4, 0);
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i + 1;
    while (j < keys.size() && keys[j].nodes == keys[i].nodes) ++j;
    if (j - i == 2) {
      const auto& a = keys[i];
      const auto& b = keys[i + 1];
      adj.neighbour[4 * a.element + a.face] = b.element;
      adj.neighbour_face[4 * a.element + a.face] = b.face;
      adj.neighbour[4 * b.element + b.face] = a.element;
      adj.neighbour_face[4 * b.element + b.face] = a.face;
    } else if (j - i > 2) {
      ++adj.nonmanifold_faces;
    }
    i = j;
  }
  return adj;
}

std::vector<FaceRef> boundary_faces(const TetMesh& mesh, const FaceAdjacency& adj) {
  std::vector<FaceRef> out;
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (std::uint8_t f = 0; f < 4; ++f)
      if (adj.is_boundary(e, f)) out.push_back({static_cast<std::uint32_t>(e), f});
  return out;
}

std::vector<std::array<std::uint32_t, 2>> unique_edges(const TetMesh& mesh) {
  std::vector<std::array<std::uint32_t, 2>> edges;
  edges.reserve(mesh.element_count() * 6);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto c = mesh.corners(e);
    for (const auto& ed : kTetEdges) {
      auto a = c[ed[0]], b = c[ed[1]];
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

NodeElementMap build_node_element_map(const TetMesh& mesh) {
  NodeElementMap map;
  map.offsets.assign(mesh.node_count() + 1, 0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (auto n : mesh.corners(e)) ++map.offsets[n + 1];
  for (std::size_t i = 0; i < mesh.node_count(); ++i) map.offsets[i + 1] += map.offsets[i];
  map.elements.resize(map.offsets.back());
  std::vector<std::uint32_t> fill(map.offsets.begin(), map.offsets.end() - 1);
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (auto n : mesh.corners(e)) map.elements[fill[n]++] = static_cast<std::uint32_t>(e);
  return map;
}

}  // namespace vox2fea
