#include "vox2fea/mesher/quality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace vox2fea::mesher {

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Uniform bucket grid over axis-aligned boxes; nearest queries grow the search
// box until the best hit is provably the nearest.
class BucketGrid {
 public:
  explicit BucketGrid(double cell) : cell_(cell) {}

  void insert(std::uint32_t id, const Vec3& lo, const Vec3& hi) {
    const auto a = cell_of(lo), b = cell_of(hi);
    for (auto z = a[2]; z <= b[2]; ++z)
      for (auto y = a[1]; y <= b[1]; ++y)
        for (auto x = a[0]; x <= b[0]; ++x) cells_[key({x, y, z})].push_back(id);
    for (int k = 0; k < 3; ++k) {
      lo_[k] = std::min(lo_[k], a[k]);
      hi_[k] = std::max(hi_[k], b[k]);
    }
  }

  bool empty() const { return cells_.empty(); }

  double nearest(const Vec3& p, const std::function<double(std::uint32_t)>& dist) const {
    double best = std::numeric_limits<double>::infinity();
    const auto c = cell_of(p);
    std::int64_t searched = -1;
    for (std::int64_t r = 1;; r *= 2) {
      for (auto z = c[2] - r; z <= c[2] + r; ++z)
        for (auto y = c[1] - r; y <= c[1] + r; ++y)
          for (auto x = c[0] - r; x <= c[0] + r; ++x) {
            if (std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])}) <= searched) continue;
            const auto it = cells_.find(key({x, y, z}));
            if (it == cells_.end()) continue;
            for (auto id : it->second) best = std::min(best, dist(id));
          }
      searched = r;
      // Anything closer than r cells would have been in the box.
      if (best <= static_cast<double>(r) * cell_) return best;
      bool covers = true;
      for (int k = 0; k < 3; ++k) covers = covers && c[k] - r <= lo_[k] && c[k] + r >= hi_[k];
      if (covers) return best;
    }
  }

 private:
  using C3 = std::array<std::int64_t, 3>;
  C3 cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t key(const C3& c) {
    const auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v + (1 << 20)) & 0x1fffff; };
    return (u(c[0]) << 42) | (u(c[1]) << 21) | u(c[2]);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
  C3 lo_{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
         std::numeric_limits<std::int64_t>::max()};
  C3 hi_{std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::min(),
         std::numeric_limits<std::int64_t>::min()};
};

struct VoxelSquare {
  std::array<int, 3> voxel;
  int axis;
  int sign;
};

double point_square_distance(const Vec3& p, const VoxelSquare& s) {
  Vec3 q;
  for (int k = 0; k < 3; ++k) {
    const double c = s.voxel[k];
    q[k] = k == s.axis ? c + 0.5 * s.sign : std::clamp(p[k], c - 0.5, c + 0.5);
  }
  return (q - p).norm();
}

void count_topology(const TetMesh& mesh, QualityReport& r) {
  const auto adj = build_face_adjacency(mesh);
  const auto faces = boundary_faces(mesh, adj);
  r.nonconformal_faces = adj.nonmanifold_faces;

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_edge;
  for (std::uint32_t i = 0; i < faces.size(); ++i) {
    const auto n = mesh.face_nodes(faces[i]);
    for (int k = 0; k < 3; ++k) by_edge[edge_key(n[k], n[(k + 1) % 3])].push_back(i);
  }
  UnionFind uf(faces.size());
  std::vector<bool> open(faces.size(), false);
  for (const auto& [edge, list] : by_edge) {
    if (list.size() == 1) open[list[0]] = true;
    for (std::size_t k = 1; k < list.size(); ++k) uf.unite(list[0], list[k]);
  }
  r.nonconformal_faces += static_cast<std::size_t>(std::count(open.begin(), open.end(), true));

  // Signed volume enclosed by each boundary shell, with normals pointing out
  // of the tets: negative shells are cavities inside the mesh.
  std::unordered_map<std::uint32_t, double> shell_volume;
  std::unordered_map<std::uint32_t, std::size_t> shell_size;
  std::unordered_map<std::uint32_t, Vec3> shell_anchor;
  for (std::uint32_t i = 0; i < faces.size(); ++i) {
    const auto root = uf.find(i);
    const auto n = mesh.face_nodes(faces[i]);
    if (!shell_anchor.count(root)) shell_anchor[root] = mesh.nodes[n[0]];
    const Vec3& o = shell_anchor[root];
    Vec3 a = mesh.nodes[n[0]] - o, b = mesh.nodes[n[1]] - o, c = mesh.nodes[n[2]] - o;
    if ((b - a).cross(c - a).dot(outward_face_normal(mesh, faces[i])) < 0) std::swap(b, c);
    shell_volume[root] += a.dot(b.cross(c)) / 6.0;
    ++shell_size[root];
  }
  for (const auto& [root, vol] : shell_volume)
    if (vol < 0) r.dangling_faces += shell_size[root];
}

void measure_fidelity(const TetMesh& mesh, const LabelVolume& ref, QualityReport& r) {
  const Dims& d = ref.dims();
  const double s = ref.spacing().x;
  auto lab = [&](int x, int y, int z) -> LabelCode {
    if (x < 0 || y < 0 || z < 0 || x >= d.nx || y >= d.ny || z >= d.nz) return label::background;
    return ref.at(x, y, z);
  };
  const auto adj = build_face_adjacency(mesh);
  const auto hist = ref.histogram();

  for (const auto& [code, count] : r.label_counts) {
    const double voxel_volume = static_cast<double>(hist[code]) * ref.spacing().voxel_volume();
    r.volume_error[code] =
        voxel_volume > 0 ? (r.label_volumes_um3[code] - voxel_volume) / voxel_volume : std::numeric_limits<double>::infinity();

    std::vector<VoxelSquare> squares;
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          if (ref.at(x, y, z) != code) continue;
          for (int a = 0; a < 3; ++a)
            for (int sg : {-1, 1}) {
              std::array<int, 3> o{x, y, z};
              o[a] += sg;
              if (lab(o[0], o[1], o[2]) != code) squares.push_back({{x, y, z}, a, sg});
            }
        }
    std::vector<std::array<Vec3, 3>> tris;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      if (mesh.labels[e] != code) continue;
      for (int f = 0; f < 4; ++f) {
        const auto nb = adj.neighbour[4 * e + f];
        if (nb != FaceAdjacency::kNone && mesh.labels[nb] == code) continue;
        const auto n = mesh.face_nodes({static_cast<std::uint32_t>(e), static_cast<std::uint8_t>(f)});
        tris.push_back({mesh.nodes[n[0]] / s, mesh.nodes[n[1]] / s, mesh.nodes[n[2]] / s});
      }
    }
    if (squares.empty() || tris.empty()) {
      r.hausdorff_voxels[code] = std::numeric_limits<double>::infinity();
      continue;
    }

    BucketGrid square_grid(2.0);
    for (std::uint32_t i = 0; i < squares.size(); ++i) {
      const Vec3 c(squares[i].voxel[0], squares[i].voxel[1], squares[i].voxel[2]);
      square_grid.insert(i, c.array() - 0.5, c.array() + 0.5);
    }
    BucketGrid tri_grid(2.0);
    for (std::uint32_t i = 0; i < tris.size(); ++i) {
      const Vec3 lo = tris[i][0].cwiseMin(tris[i][1]).cwiseMin(tris[i][2]);
      const Vec3 hi = tris[i][0].cwiseMax(tris[i][1]).cwiseMax(tris[i][2]);
      tri_grid.insert(i, lo, hi);
    }

    double h = 0;
    const auto to_square = [&](const Vec3& p) {
      return square_grid.nearest(p, [&](std::uint32_t i) { return point_square_distance(p, squares[i]); });
    };
    for (const auto& t : tris) {
      for (const Vec3& p : {t[0], t[1], t[2], Vec3((t[0] + t[1]) / 2), Vec3((t[1] + t[2]) / 2),
                            Vec3((t[2] + t[0]) / 2), Vec3((t[0] + t[1] + t[2]) / 3)})
        h = std::max(h, to_square(p));
    }
    for (const auto& sq : squares) {
      Vec3 p(sq.voxel[0], sq.voxel[1], sq.voxel[2]);
      p[sq.axis] += 0.5 * sq.sign;
      const double dist = tri_grid.nearest(p, [&](std::uint32_t i) {
        return point_triangle_distance(p, tris[i][0], tris[i][1], tris[i][2]);
      });
      h = std::max(h, dist);
    }
    r.hausdorff_voxels[code] = h;
  }
}

}  // namespace

double QualityReport::max_hausdorff_voxels() const {
  double m = 0;
  for (const auto& [code, h] : hausdorff_voxels) m = std::max(m, h);
  return m;
}

double QualityReport::max_abs_volume_error() const {
  double m = 0;
  for (const auto& [code, e] : volume_error) m = std::max(m, std::abs(e));
  return m;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Closest point by Voronoi region of the triangle.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + ab * (d1 / (d1 - d3)))).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + ac * (d2 / (d2 - d6)))).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return (p - (b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))))).norm();
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

QualityReport validate_mesh(const TetMesh& mesh, const LabelVolume* reference) {
  QualityReport r;
  r.element_count = mesh.element_count();
  r.node_count = mesh.node_count();
  if (mesh.element_count() == 0) return r;

  std::vector<double> mins(mesh.element_count());
  double lowest = 180;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto p = mesh.corner_points(e);
    const double vol = signed_volume(p[0], p[1], p[2], p[3]);
    if (!(vol > 0)) ++r.inverted_count;
    const auto ang = dihedral_angles_deg(p[0], p[1], p[2], p[3]);
    mins[e] = vol > 0 ? *std::min_element(ang.begin(), ang.end()) : 0.0;
    lowest = std::min(lowest, mins[e]);
    ++r.label_counts[mesh.labels[e]];
    r.label_volumes_um3[mesh.labels[e]] += vol;
  }
  r.min_dihedral_deg = lowest;
  auto mid = mins.begin() + static_cast<std::ptrdiff_t>(mins.size() / 2);
  std::nth_element(mins.begin(), mid, mins.end());
  r.median_dihedral_deg = *mid;

  count_topology(mesh, r);
  if (reference != nullptr) measure_fidelity(mesh, *reference, r);
  return r;
}

}  // namespace vox2fea::mesher
