#include "vox2fea/mesher/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace vox2fea::mesher {

namespace {

// Smallest dihedral angle for valid tets; below -1 (and ordered by how
// inverted) otherwise, so "larger is better" holds across the sign change.
double tet_quality(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double vol = signed_volume(a, b, c, d);
  const double l = std::sqrt(std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (d - a).squaredNorm(),
                                       (c - b).squaredNorm(), (d - b).squaredNorm(), (d - c).squaredNorm()}));
  if (!(l > 0)) return -2;
  if (vol <= 1e-12 * l * l * l) return -1 + vol / (l * l * l);
  const auto ang = dihedral_angles_deg(a, b, c, d);
  return *std::min_element(ang.begin(), ang.end());
}

double tet_quality(const TetMesh& m, std::size_t e) {
  const auto p = m.corner_points(e);
  return tet_quality(p[0], p[1], p[2], p[3]);
}

enum class Freedom : std::uint8_t { free, plane, capped };

struct NodeInfo {
  Freedom freedom = Freedom::free;
  Vec3 normal = Vec3::Zero();  // plane normal
};

std::vector<NodeInfo> classify_nodes(const TetMesh& mesh) {
  std::vector<NodeInfo> info(mesh.node_count());
  std::vector<std::uint8_t> touched_label(mesh.node_count(), 0xff);
  std::vector<bool> multi(mesh.node_count(), false);
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (auto n : mesh.corners(e)) {
      if (touched_label[n] == 0xff) touched_label[n] = mesh.labels[e];
      else if (touched_label[n] != mesh.labels[e]) multi[n] = true;
    }
  const auto adj = build_face_adjacency(mesh);
  std::vector<bool> on_boundary(mesh.node_count(), false), coplanar(mesh.node_count(), true);
  for (const auto& f : boundary_faces(mesh, adj)) {
    const Vec3 n = outward_face_normal(mesh, f);
    for (auto v : mesh.face_nodes(f)) {
      if (!on_boundary[v]) {
        on_boundary[v] = true;
        info[v].normal = n;
      } else if (n.dot(info[v].normal) < 1 - 1e-9) {
        coplanar[v] = false;
      }
    }
  }
  for (std::size_t v = 0; v < info.size(); ++v) {
    if (multi[v] || (on_boundary[v] && !coplanar[v])) info[v].freedom = Freedom::capped;
    else if (on_boundary[v]) info[v].freedom = Freedom::plane;
  }
  return info;
}

class Optimizer {
 public:
  Optimizer(const TetMesh& mesh, const OptimizeConfig& cfg)
      : mesh_(mesh), cfg_(cfg), origin_(mesh.nodes), info_(classify_nodes(mesh)) {}

  TetMesh run() {
    for (int pass = 0; pass < cfg_.max_passes; ++pass) {
      std::size_t changes = smooth_pass();
      if (cfg_.flips && mesh_.surfaces.empty()) changes += flip_pass();
      if (changes == 0) break;
    }
    return std::move(mesh_);
  }

 private:
  std::size_t smooth_pass();
  std::size_t flip_pass();
  Vec3 constrain(std::uint32_t v, const Vec3& p) const;
  double worst_at(std::uint32_t v, const NodeElementMap& n2e) const {
    double q = 180;
    for (auto e : n2e.of(v)) q = std::min(q, tet_quality(mesh_, e));
    return q;
  }

  TetMesh mesh_;
  OptimizeConfig cfg_;
  std::vector<Vec3> origin_;
  std::vector<NodeInfo> info_;
};

Vec3 Optimizer::constrain(std::uint32_t v, const Vec3& p) const {
  const auto& info = info_[v];
  const Vec3& o = origin_[v];
  switch (info.freedom) {
    case Freedom::free:
      return p;
    case Freedom::plane:
      return p - info.normal * (p - o).dot(info.normal);
    case Freedom::capped: {
      const double cap = cfg_.max_interface_shift_voxels * cfg_.voxel_um;
      const Vec3 d = p - o;
      const double len = d.norm();
      return len <= cap ? p : Vec3(o + d * (cap / len));
    }
  }
  return p;
}

std::size_t Optimizer::smooth_pass() {
  const auto n2e = build_node_element_map(mesh_);
  std::size_t moved = 0;
  std::vector<std::uint32_t> ring;
  for (std::uint32_t v = 0; v < mesh_.node_count(); ++v) {
    const auto incident = n2e.of(v);
    if (incident.empty()) continue;
    const double before = worst_at(v, n2e);
    if (before >= cfg_.target_min_dihedral_deg) continue;
    ring.clear();
    for (auto e : incident)
      for (auto n : mesh_.corners(e))
        if (n != v) ring.push_back(n);
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    Vec3 centre = Vec3::Zero();
    for (auto n : ring) centre += mesh_.nodes[n];
    centre /= static_cast<double>(ring.size());

    const Vec3 start = mesh_.nodes[v];
    bool accepted = false;
    for (double alpha : {1.0, 0.5, 0.25, 0.125}) {
      mesh_.nodes[v] = constrain(v, start + alpha * (centre - start));
      if (worst_at(v, n2e) > before + 1e-9) {
        accepted = true;
        break;
      }
    }
    if (accepted) ++moved;
    else mesh_.nodes[v] = start;
  }
  return moved;
}

std::size_t Optimizer::flip_pass() {
  const std::size_t n_old = mesh_.element_count();
  const auto adj = build_face_adjacency(mesh_);
  const auto n2e = build_node_element_map(mesh_);
  std::vector<bool> dead(n_old, false);
  std::vector<std::array<std::uint32_t, 4>> fresh;
  std::vector<LabelCode> fresh_labels;
  std::size_t flips = 0;

  const auto vol = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    return signed_volume(mesh_.nodes[a], mesh_.nodes[b], mesh_.nodes[c], mesh_.nodes[d]);
  };
  const auto oriented = [&](std::array<std::uint32_t, 4> t) {
    if (vol(t[0], t[1], t[2], t[3]) < 0) std::swap(t[1], t[2]);
    return t;
  };
  const auto quality = [&](const std::array<std::uint32_t, 4>& t) {
    return tet_quality(mesh_.nodes[t[0]], mesh_.nodes[t[1]], mesh_.nodes[t[2]], mesh_.nodes[t[3]]);
  };
  // A replacement is valid when its tets tile exactly the same region.
  const auto tiles = [&](const std::vector<std::array<std::uint32_t, 4>>& tets, double old_volume) {
    double sum = 0;
    for (const auto& t : tets) {
      const double v = std::abs(vol(t[0], t[1], t[2], t[3]));
      if (!(v > 1e-9 * old_volume)) return false;
      sum += v;
    }
    return std::abs(sum - old_volume) <= 1e-9 * old_volume;
  };

  for (std::uint32_t e = 0; e < n_old; ++e) {
    if (dead[e]) continue;
    const double qe = tet_quality(mesh_, e);
    if (qe >= cfg_.target_min_dihedral_deg) continue;
    const auto c = mesh_.corners(e);
    bool done = false;

    // 2-3: replace e and a face neighbour by three tets around a new edge.
    for (int f = 0; f < 4 && !done; ++f) {
      const auto nb = adj.neighbour[4 * e + f];
      if (nb == FaceAdjacency::kNone || dead[nb] || nb >= n_old || mesh_.labels[nb] != mesh_.labels[e]) continue;
      const auto face = mesh_.face_nodes({e, static_cast<std::uint8_t>(f)});
      const std::uint32_t d = c[kFaceOpposite[f]];
      const std::uint32_t o = mesh_.corners(nb)[kFaceOpposite[adj.neighbour_face[4 * e + f]]];
      std::vector<std::array<std::uint32_t, 4>> repl;
      for (int k = 0; k < 3; ++k) repl.push_back(oriented({face[k], face[(k + 1) % 3], d, o}));
      const double old_volume = std::abs(tet_volume(mesh_, e)) + std::abs(tet_volume(mesh_, nb));
      if (!tiles(repl, old_volume)) continue;
      const double old_q = std::min(qe, tet_quality(mesh_, nb));
      double new_q = 180;
      for (const auto& t : repl) new_q = std::min(new_q, quality(t));
      if (new_q <= old_q + 1e-9) continue;
      dead[e] = dead[nb] = true;
      for (const auto& t : repl) {
        fresh.push_back(t);
        fresh_labels.push_back(mesh_.labels[e]);
      }
      ++flips;
      done = true;
    }

    // 3-2: an edge with exactly three tets around it collapses to two tets.
    for (int k = 0; k < 6 && !done; ++k) {
      const std::uint32_t u = c[kTetEdges[k][0]], w = c[kTetEdges[k][1]];
      if (n2e.of(u).size() <= 3 || n2e.of(w).size() <= 3) continue;
      std::vector<std::uint32_t> around;
      for (auto t : n2e.of(u)) {
        const auto tc = mesh_.corners(t);
        if (std::find(tc.begin(), tc.end(), w) != tc.end()) around.push_back(t);
      }
      if (around.size() != 3) continue;
      bool ok = true;
      std::vector<std::uint32_t> ringv;
      for (auto t : around) {
        ok = ok && !dead[t] && mesh_.labels[t] == mesh_.labels[e];
        for (auto n : mesh_.corners(t))
          if (n != u && n != w) ringv.push_back(n);
      }
      if (!ok) continue;
      std::sort(ringv.begin(), ringv.end());
      if (ringv.size() != 6 || ringv[0] != ringv[1] || ringv[2] != ringv[3] || ringv[4] != ringv[5] ||
          ringv[1] == ringv[2] || ringv[3] == ringv[4])
        continue;
      const std::uint32_t a = ringv[0], b = ringv[2], cc = ringv[4];
      std::vector<std::array<std::uint32_t, 4>> repl{oriented({a, b, cc, u}), oriented({a, b, cc, w})};
      double old_volume = 0, old_q = 180;
      for (auto t : around) {
        old_volume += std::abs(tet_volume(mesh_, t));
        old_q = std::min(old_q, tet_quality(mesh_, t));
      }
      if (!tiles(repl, old_volume)) continue;
      double new_q = 180;
      for (const auto& t : repl) new_q = std::min(new_q, quality(t));
      if (new_q <= old_q + 1e-9) continue;
      for (auto t : around) dead[t] = true;
      for (const auto& t : repl) {
        fresh.push_back(t);
        fresh_labels.push_back(mesh_.labels[e]);
      }
      ++flips;
      done = true;
    }
  }
  if (flips == 0) return 0;

  TetMesh next;
  next.nodes = std::move(mesh_.nodes);
  next.node_sets = std::move(mesh_.node_sets);
  next.order = mesh_.order;
  for (std::uint32_t e = 0; e < n_old; ++e)
    if (!dead[e]) next.add_tet(mesh_.corners(e), mesh_.labels[e]);
  for (std::size_t i = 0; i < fresh.size(); ++i) next.add_tet(fresh[i], fresh_labels[i]);
  mesh_ = std::move(next);
  return flips;
}

}  // namespace

std::pair<TetMesh, QualityReport> optimize_mesh(const TetMesh& mesh, const OptimizeConfig& cfg) {
  if (mesh.order != ElementOrder::linear) throw InvalidArgument("optimize_mesh: linear mesh expected");
  if (!(cfg.voxel_um > 0) || !(cfg.max_interface_shift_voxels >= 0))
    throw InvalidArgument("optimize_mesh: voxel size and shift cap must be positive");
  Optimizer opt(mesh, cfg);
  TetMesh out = opt.run();
  QualityReport report = validate_mesh(out);
  return {std::move(out), std::move(report)};
}

}  // namespace vox2fea::mesher
