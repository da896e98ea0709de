#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vox2fea/core/types.hpp"

namespace vox2fea {

enum class ElementOrder { linear, quadratic };

/// One face of one element. Face ids are 0-based; face f is written as S{f+1}.
struct FaceRef {
  std::uint32_t element = 0;
  std::uint8_t face = 0;
  auto operator<=>(const FaceRef&) const = default;
};

/// Local corner indices of each tet face, matching the S1..S4 numbering of
/// C3D4/C3D10 elements: S1 = 1-2-3, S2 = 1-4-2, S3 = 2-4-3, S4 = 3-4-1.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{0, 1, 2}, {0, 3, 1}, {1, 3, 2}, {2, 3, 0}}};
/// Corner opposite each face.
inline constexpr std::array<int, 4> kFaceOpposite{3, 2, 0, 1};
/// Edge corner pairs; quadratic midside node 4 + i sits on edge i.
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges{{{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}}};

/// Volumetric tetrahedral mesh. Coordinates are micrometres.
struct TetMesh {
  std::vector<Vec3> nodes;
  std::vector<std::uint32_t> connectivity;  // nodes_per_element() entries per element
  std::vector<LabelCode> labels;            // one per element
  std::map<std::string, std::vector<std::uint32_t>> node_sets;
  std::map<std::string, std::vector<FaceRef>> surfaces;
  ElementOrder order = ElementOrder::linear;

  int nodes_per_element() const { return order == ElementOrder::linear ? 4 : 10; }
  std::size_t element_count() const { return labels.size(); }
  std::size_t node_count() const { return nodes.size(); }

  std::span<const std::uint32_t> element(std::size_t e) const {
    return {connectivity.data() + e * nodes_per_element(), static_cast<std::size_t>(nodes_per_element())};
  }
  std::span<std::uint32_t> element(std::size_t e) {
    return {connectivity.data() + e * nodes_per_element(), static_cast<std::size_t>(nodes_per_element())};
  }
  std::array<std::uint32_t, 4> corners(std::size_t e) const {
    const auto el = element(e);
    return {el[0], el[1], el[2], el[3]};
  }
  std::array<Vec3, 4> corner_points(std::size_t e) const {
    const auto c = corners(e);
    return {nodes[c[0]], nodes[c[1]], nodes[c[2]], nodes[c[3]]};
  }
  std::uint32_t add_node(const Vec3& p) {
    nodes.push_back(p);
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }
  void add_tet(std::array<std::uint32_t, 4> corners, LabelCode code);
  std::array<std::uint32_t, 3> face_nodes(FaceRef f) const;
};

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double tet_volume(const TetMesh& mesh, std::size_t e);  // signed
Vec3 tet_centroid(const TetMesh& mesh, std::size_t e);

/// Interior dihedral angles in degrees at the six edges (kTetEdges order).
std::array<double, 6> dihedral_angles_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
/// Minimum dihedral angle in degrees; negative values flag inverted or
/// degenerate tets (the value is then -1 - |min angle|).
double min_dihedral_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Unit normal of an element face pointing away from the element.
Vec3 outward_face_normal(const TetMesh& mesh, FaceRef f);
double face_area(const TetMesh& mesh, FaceRef f);
Vec3 face_centroid(const TetMesh& mesh, FaceRef f);

/// Face-to-face adjacency over corner nodes.
struct FaceAdjacency {
  static constexpr std::uint32_t kNone = 0xffffffffu;
  /// neighbour[4 * e + f] is the element sharing face f of e, or kNone.
  std::vector<std::uint32_t> neighbour;
  std::vector<std::uint8_t> neighbour_face;
  /// Faces shared by more than two elements.
  std::size_t nonmanifold_faces = 0;

  bool is_boundary(std::size_t e, int f) const { return neighbour[4 * e + f] == kNone; }
};

FaceAdjacency build_face_adjacency(const TetMesh& mesh);

/// Faces with exactly one incident element.
std::vector<FaceRef> boundary_faces(const TetMesh& mesh, const FaceAdjacency& adj);

/// Sorted (a < b) unique corner edges.
std::vector<std::array<std::uint32_t, 2>> unique_edges(const TetMesh& mesh);

/// Node -> incident elements (CSR).
struct NodeElementMap {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> elements;
  std::span<const std::uint32_t> of(std::uint32_t node) const {
    return {elements.data() + offsets[node], offsets[node + 1] - offsets[node]};
  }
};
NodeElementMap build_node_element_map(const TetMesh& mesh);

}  // namespace vox2fea
