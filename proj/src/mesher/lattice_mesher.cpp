#include "vox2fea/mesher/lattice_mesher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <fmt/core.h>

#include "vox2fea/core/components.hpp"

namespace vox2fea::mesher {

namespace {

using I3 = std::array<std::int64_t, 3>;

constexpr int kBgRankSentinel = 1 << 20;

// Tet volume, in cubic voxels, of rank r on a lattice whose level-0 cell has
// side b: even ranks are face-fanned tets (cell^3 / 24), odd ranks are
// body-centred tets (cell^3 / 12), and every two ranks double the cell.
double rank_volume(int rank, double b) {
  const double cell = b * std::ldexp(1.0, rank / 2);
  return cell * cell * cell / (rank % 2 == 0 ? 24.0 : 12.0);
}

int rank_for(double target, double b) {
  int r = 0;
  while (rank_volume(r + 1, b) <= target * (1 + 1e-9)) ++r;
  return r;
}

std::uint16_t bit(LabelCode c) { return static_cast<std::uint16_t>(1u << (c & 15)); }

std::uint64_t vertex_key(const I3& p) {
  return (static_cast<std::uint64_t>(p[0]) << 42) | (static_cast<std::uint64_t>(p[1]) << 21) |
         static_cast<std::uint64_t>(p[2]);
}

struct Leaf {
  int level = 0;
  I3 idx{};  // cell index at its own level
  std::uint16_t mask = 0;
  bool fan = false;
  bool alive = true;
  std::uint32_t center = 0;
};

class LatticeBuilder {
 public:
  LatticeBuilder(const LabelVolume& vol, const SizingField& sizing, const MesherConfig& cfg,
                 Diagnostics* diag)
      : vol_(vol), cfg_(cfg), diag_(diag) {
    setup(sizing);
  }

  TetMesh build();

 private:
  // --- setup -------------------------------------------------------------
  void setup(const SizingField& sizing);
  void mark_small_features();

  // --- octree ------------------------------------------------------------
  std::int64_t size_units(int level) const { return std::int64_t{1} << (level - lmin_ + 1); }
  I3 corner_units(const Leaf& c) const {
    const auto s = size_units(c.level);
    return {c.idx[0] * s, c.idx[1] * s, c.idx[2] * s};
  }
  std::uint64_t leaf_key(int level, const I3& idx) const {
    return (static_cast<std::uint64_t>(level + 16) << 59) | (static_cast<std::uint64_t>(idx[0]) << 38) |
           (static_cast<std::uint64_t>(idx[1]) << 19) | static_cast<std::uint64_t>(idx[2]);
  }
  std::pair<std::uint16_t, bool> query(int level, const I3& idx) const;
  int required_level(std::uint16_t mask, bool fine) const;
  bool needs_fan(int level, std::uint16_t mask) const;
  void subdivide(int level, const I3& idx);
  void add_leaf(int level, const I3& idx, std::uint16_t mask);
  void split_leaf(std::uint32_t leaf);
  std::int64_t locate(const I3& p) const;  // leaf index or -1
  void balance();

  // --- tets --------------------------------------------------------------
  std::uint32_t vertex(const I3& p);
  std::int64_t find_vertex(const I3& p) const;
  void emit_tet(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d);
  void process_faces();
  std::vector<std::uint32_t> perimeter(const I3& corner, int axis, std::int64_t size);

  Vec3 to_voxel(const I3& p) const {
    return origin_ + Vec3(static_cast<double>(p[0]), static_cast<double>(p[1]), static_cast<double>(p[2])) * unit_;
  }
  LabelCode voxel_label(std::int64_t x, std::int64_t y, std::int64_t z) const {
    const Dims& d = vol_.dims();
    if (x < 0 || y < 0 || z < 0 || x >= d.nx || y >= d.ny || z >= d.nz) return label::background;
    return vol_.at(static_cast<int>(x), static_cast<int>(y), static_cast<int>(z));
  }

  // --- snapping ----------------------------------------------------------
  void snap(TetMesh& mesh) const;
  std::size_t relabel(TetMesh& mesh) const;

  const LabelVolume& vol_;
  MesherConfig cfg_;
  Diagnostics* diag_;

  double b_ = 1;  // level-0 cell side, voxels
  int lmin_ = 0;
  int ltop_ = 1;
  double unit_ = 0.5;  // lattice unit, voxels
  Vec3 origin_ = Vec3::Zero();
  I3 top_count_{};
  std::array<int, 16> rank_{};
  std::vector<std::uint8_t> fine_;  // voxels of undersized features

  std::vector<Leaf> leaves_;
  std::unordered_map<std::uint64_t, std::uint32_t> leaf_index_;

  std::vector<I3> verts_;
  std::unordered_map<std::uint64_t, std::uint32_t> vert_index_;
  std::vector<std::array<std::uint32_t, 4>> tets_;
};

void LatticeBuilder::setup(const SizingField& sizing) {
  const Dims& d = vol_.dims();
  std::array<bool, 16> present{};
  I3 lo{d.nx, d.ny, d.nz}, hi{-1, -1, -1};
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const LabelCode c = vol_.at(x, y, z);
        if (c == label::background) continue;
        present[c & 15] = true;
        lo = {std::min<std::int64_t>(lo[0], x), std::min<std::int64_t>(lo[1], y), std::min<std::int64_t>(lo[2], z)};
        hi = {std::max<std::int64_t>(hi[0], x), std::max<std::int64_t>(hi[1], y), std::max<std::int64_t>(hi[2], z)};
      }
  if (hi[0] < 0) throw InvalidArgument("generate_tet_mesh: volume holds no labelled voxels");

  std::vector<LabelCode> labels;
  for (int c = 1; c < 16; ++c)
    if (present[c]) labels.push_back(static_cast<LabelCode>(c));
  const double nominal = base_cell_size_voxels(sizing, cfg_.fill_factor, labels);
  // Ranks come from the nominal cell so that shrinking it below cannot merge
  // the ranks of labels whose bounds differ.
  int max_level = 0;
  rank_.fill(kBgRankSentinel);
  for (LabelCode c : labels) {
    rank_[c] = rank_for(cfg_.fill_factor * sizing.max_volume(c), nominal);
    max_level = std::max(max_level, rank_[c] / 2);
  }
  // Shrink the cell slightly so whole cells span the slice range and both
  // end caps fall on cell faces.
  const double z_extent = static_cast<double>(hi[2] - lo[2] + 1);
  b_ = z_extent / std::ceil(z_extent / nominal - 1e-9);
  ltop_ = max_level + 1;

  mark_small_features();
  lmin_ = std::min({lmin_, cfg_.interface_level, cfg_.junction_level});
  unit_ = b_ * std::ldexp(1.0, lmin_ - 1);

  // The grid starts flush with the first labelled voxel so the lowest slice
  // becomes a flat cap.
  origin_ = Vec3(lo[0] - 0.5, lo[1] - 0.5, lo[2] - 0.5);
  const double top_side = b_ * std::ldexp(1.0, ltop_);
  for (int a = 0; a < 3; ++a) {
    const double extent = static_cast<double>(hi[a] - lo[a] + 1);
    top_count_[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent / top_side - 1e-9)));
  }
}

void LatticeBuilder::mark_small_features() {
  lmin_ = 0;
  if (!cfg_.refine_small_features) return;
  const Dims& d = vol_.dims();
  std::size_t small = 0;
  for (LabelCode code : {label::lipid, label::calcium}) {
    const auto comps = connected_components(vol_, code, Connectivity::volumetric26);
    if (comps.count() == 0) continue;
    std::vector<I3> lo(comps.count(), I3{d.nx, d.ny, d.nz}), hi(comps.count(), I3{-1, -1, -1});
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          const auto id = comps.ids[d.index(x, y, z)];
          if (!id) continue;
          auto& l = lo[id - 1];
          auto& h = hi[id - 1];
          l = {std::min<std::int64_t>(l[0], x), std::min<std::int64_t>(l[1], y), std::min<std::int64_t>(l[2], z)};
          h = {std::max<std::int64_t>(h[0], x), std::max<std::int64_t>(h[1], y), std::max<std::int64_t>(h[2], z)};
        }
    std::vector<bool> is_small(comps.count(), false);
    for (std::size_t i = 0; i < comps.count(); ++i) {
      const auto extent = std::max({hi[i][0] - lo[i][0], hi[i][1] - lo[i][1], hi[i][2] - lo[i][2]}) + 1;
      if (static_cast<double>(extent) < b_) {
        is_small[i] = true;
        ++small;
      }
    }
    if (!std::any_of(is_small.begin(), is_small.end(), [](bool v) { return v; })) continue;
    if (fine_.empty()) fine_.assign(d.count(), 0);
    for (std::size_t i = 0; i < fine_.size(); ++i)
      if (comps.ids[i] && is_small[comps.ids[i] - 1]) fine_[i] = 1;
  }
  if (small > 0) {
    lmin_ = -1;
    warn(diag_, fmt::format("generate_tet_mesh: {} feature(s) smaller than one {:.2f}-voxel cell; "
                            "refining locally",
                            small, b_));
  }
}

std::pair<std::uint16_t, bool> LatticeBuilder::query(int level, const I3& idx) const {
  const auto s = size_units(level);
  std::uint16_t mask = 0;
  bool fine = false;
  std::array<std::int64_t, 3> vlo{}, vhi{};
  for (int a = 0; a < 3; ++a) {
    const double lo = origin_[a] + static_cast<double>(idx[a] * s) * unit_;
    const double hi = lo + static_cast<double>(s) * unit_;
    vlo[a] = static_cast<std::int64_t>(std::floor(lo - 0.5 + 1e-9)) + 1;
    vhi[a] = static_cast<std::int64_t>(std::ceil(hi + 0.5 - 1e-9)) - 1;
  }
  const Dims& d = vol_.dims();
  for (auto z = vlo[2]; z <= vhi[2]; ++z)
    for (auto y = vlo[1]; y <= vhi[1]; ++y)
      for (auto x = vlo[0]; x <= vhi[0]; ++x) {
        if (x < 0 || y < 0 || z < 0 || x >= d.nx || y >= d.ny || z >= d.nz) {
          mask |= bit(label::background);
          continue;
        }
        const std::size_t i = d.index(static_cast<int>(x), static_cast<int>(y), static_cast<int>(z));
        mask |= bit(vol_[i]);
        if (!fine_.empty() && fine_[i]) fine = true;
      }
  return {mask, fine};
}

int LatticeBuilder::required_level(std::uint16_t mask, bool fine) const {
  int level = ltop_;
  for (int c = 1; c < 16; ++c)
    if (mask & (1u << c)) level = std::min(level, rank_[c] / 2);
  if (std::popcount(mask) > 1) level = std::min(level, cfg_.interface_level);
  if (std::popcount(mask) > 2) level = std::min(level, cfg_.junction_level);
  if (fine) level = std::min(level, -1);
  return std::max(level, lmin_);
}

bool LatticeBuilder::needs_fan(int level, std::uint16_t mask) const {
  for (int c = 1; c < 16; ++c)
    if ((mask & (1u << c)) && rank_[c] <= 2 * level) return true;
  return false;
}

void LatticeBuilder::add_leaf(int level, const I3& idx, std::uint16_t mask) {
  Leaf leaf;
  leaf.level = level;
  leaf.idx = idx;
  leaf.mask = mask;
  leaf.fan = needs_fan(level, mask);
  leaf_index_[leaf_key(level, idx)] = static_cast<std::uint32_t>(leaves_.size());
  leaves_.push_back(leaf);
}

void LatticeBuilder::subdivide(int level, const I3& idx) {
  const auto [mask, fine] = query(level, idx);
  if (level > required_level(mask, fine)) {
    for (int c = 0; c < 8; ++c)
      subdivide(level - 1, {2 * idx[0] + (c & 1), 2 * idx[1] + ((c >> 1) & 1), 2 * idx[2] + ((c >> 2) & 1)});
  } else {
    add_leaf(level, idx, mask);
  }
}

void LatticeBuilder::split_leaf(std::uint32_t li) {
  Leaf& leaf = leaves_[li];
  leaf.alive = false;
  leaf_index_.erase(leaf_key(leaf.level, leaf.idx));
  const int level = leaf.level - 1;
  const I3 idx = leaf.idx;
  for (int c = 0; c < 8; ++c) {
    const I3 child{2 * idx[0] + (c & 1), 2 * idx[1] + ((c >> 1) & 1), 2 * idx[2] + ((c >> 2) & 1)};
    add_leaf(level, child, query(level, child).first);
  }
}

std::int64_t LatticeBuilder::locate(const I3& p) const {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < 0 || p[a] >= top_count_[a] * size_units(ltop_)) return -1;
  }
  for (int level = ltop_; level >= lmin_; --level) {
    const auto s = size_units(level);
    const auto it = leaf_index_.find(leaf_key(level, {p[0] / s, p[1] / s, p[2] / s}));
    if (it != leaf_index_.end()) return it->second;
  }
  return -1;
}

void LatticeBuilder::balance() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t li = 0; li < leaves_.size(); ++li) {
      if (!leaves_[li].alive) continue;
      const Leaf leaf = leaves_[li];
      const auto s = size_units(leaf.level);
      const I3 c = corner_units(leaf);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const I3 probe{c[0] + s / 2 + dx * (s / 2 + 1), c[1] + s / 2 + dy * (s / 2 + 1),
                           c[2] + s / 2 + dz * (s / 2 + 1)};
            const auto n = locate(probe);
            if (n >= 0 && leaves_[n].level > leaf.level + 1) {
              split_leaf(static_cast<std::uint32_t>(n));
              changed = true;
            }
          }
    }
  }
}

std::uint32_t LatticeBuilder::vertex(const I3& p) {
  const auto key = vertex_key(p);
  const auto it = vert_index_.find(key);
  if (it != vert_index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(verts_.size());
  verts_.push_back(p);
  vert_index_.emplace(key, id);
  return id;
}

std::int64_t LatticeBuilder::find_vertex(const I3& p) const {
  const auto it = vert_index_.find(vertex_key(p));
  return it == vert_index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void LatticeBuilder::emit_tet(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  const I3& pa = verts_[a];
  auto sub = [&](const I3& q) { return I3{q[0] - pa[0], q[1] - pa[1], q[2] - pa[2]}; };
  const I3 u = sub(verts_[b]), v = sub(verts_[c]), w = sub(verts_[d]);
  const std::int64_t det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
                           u[2] * (v[0] * w[1] - v[1] * w[0]);
  if (det == 0) return;
  if (det > 0) {
    tets_.push_back({a, b, c, d});
  } else {
    tets_.push_back({a, c, b, d});
  }
}

std::vector<std::uint32_t> LatticeBuilder::perimeter(const I3& corner, int axis, std::int64_t size) {
  const int b1 = (axis + 1) % 3, b2 = (axis + 2) % 3;
  const std::int64_t step = size_units(lmin_);  // finest cell side
  const std::array<std::array<std::int64_t, 2>, 4> corners{{{0, 0}, {size, 0}, {size, size}, {0, size}}};
  std::vector<std::uint32_t> out;
  for (int e = 0; e < 4; ++e) {
    const auto& from = corners[e];
    const auto& to = corners[(e + 1) % 4];
    const std::int64_t du = (to[0] - from[0]) / size, dv = (to[1] - from[1]) / size;
    for (std::int64_t t = 0; t < size; t += step) {
      I3 p = corner;
      p[b1] += from[0] + du * t;
      p[b2] += from[1] + dv * t;
      const auto v = find_vertex(p);
      if (v >= 0) out.push_back(static_cast<std::uint32_t>(v));
    }
  }
  return out;
}

void LatticeBuilder::process_faces() {
  for (std::uint32_t li = 0; li < leaves_.size(); ++li) {
    const Leaf& leaf = leaves_[li];
    const auto s = size_units(leaf.level);
    const I3 c = corner_units(leaf);
    for (int axis = 0; axis < 3; ++axis)
      for (int sign : {-1, 1}) {
        I3 face_corner = c;
        if (sign > 0) face_corner[axis] += s;
        I3 probe = face_corner;
        probe[(axis + 1) % 3] += s / 2;
        probe[(axis + 2) % 3] += s / 2;
        const I3 face_center = probe;
        probe[axis] += sign;
        const auto n = locate(probe);
        const Leaf* other = nullptr;
        if (n >= 0) {
          other = &leaves_[n];
          if (other->level < leaf.level) continue;                    // finer side owns it
          if (other->level == leaf.level && sign < 0) continue;       // owned by the other leaf
        }
        const auto ring = perimeter(face_corner, axis, s);
        // Faces against empty space are fanned so the surface stays flat there.
        const bool bcc = other != nullptr && other->level == leaf.level && ring.size() == 4 &&
                         !leaf.fan && !other->fan && other->mask != bit(label::background) &&
                         leaf.mask != bit(label::background);
        if (bcc) {
          for (std::size_t i = 0; i < 4; ++i)
            emit_tet(leaf.center, other->center, ring[i], ring[(i + 1) % 4]);
          continue;
        }
        const std::uint32_t fc = vertex(face_center);
        for (std::size_t i = 0; i < ring.size(); ++i) {
          emit_tet(leaf.center, fc, ring[i], ring[(i + 1) % ring.size()]);
          if (other != nullptr) emit_tet(other->center, fc, ring[i], ring[(i + 1) % ring.size()]);
        }
      }
  }
}

TetMesh LatticeBuilder::build() {
  for (std::int64_t k = 0; k < top_count_[2]; ++k)
    for (std::int64_t j = 0; j < top_count_[1]; ++j)
      for (std::int64_t i = 0; i < top_count_[0]; ++i) subdivide(ltop_, {i, j, k});
  balance();

  // Deterministic leaf order: by corner position, then level.
  std::vector<Leaf> alive;
  for (const auto& l : leaves_)
    if (l.alive) alive.push_back(l);
  std::sort(alive.begin(), alive.end(), [this](const Leaf& a, const Leaf& b) {
    const I3 ca = corner_units(a), cb = corner_units(b);
    return std::tie(ca[2], ca[1], ca[0], a.level) < std::tie(cb[2], cb[1], cb[0], b.level);
  });
  leaves_ = std::move(alive);
  leaf_index_.clear();
  for (std::uint32_t i = 0; i < leaves_.size(); ++i) leaf_index_[leaf_key(leaves_[i].level, leaves_[i].idx)] = i;

  for (const auto& leaf : leaves_) {
    const auto s = size_units(leaf.level);
    const I3 c = corner_units(leaf);
    for (int k = 0; k < 8; ++k) vertex({c[0] + (k & 1) * s, c[1] + ((k >> 1) & 1) * s, c[2] + ((k >> 2) & 1) * s});
  }
  for (auto& leaf : leaves_) {
    const auto s = size_units(leaf.level);
    const I3 c = corner_units(leaf);
    leaf.center = vertex({c[0] + s / 2, c[1] + s / 2, c[2] + s / 2});
  }
  process_faces();

  // Label by centroid, drop background, compact nodes.
  TetMesh mesh;
  std::vector<std::int64_t> remap(verts_.size(), -1);
  for (const auto& t : tets_) {
    const Vec3 cen = (to_voxel(verts_[t[0]]) + to_voxel(verts_[t[1]]) + to_voxel(verts_[t[2]]) +
                      to_voxel(verts_[t[3]])) / 4.0;
    const LabelCode code = voxel_label(static_cast<std::int64_t>(std::floor(cen.x() + 0.5)),
                                       static_cast<std::int64_t>(std::floor(cen.y() + 0.5)),
                                       static_cast<std::int64_t>(std::floor(cen.z() + 0.5)));
    if (code == label::background) continue;
    std::array<std::uint32_t, 4> c{};
    for (int k = 0; k < 4; ++k) {
      if (remap[t[k]] < 0) {
        remap[t[k]] = static_cast<std::int64_t>(mesh.nodes.size());
        mesh.nodes.push_back(to_voxel(verts_[t[k]]));
      }
      c[k] = static_cast<std::uint32_t>(remap[t[k]]);
    }
    mesh.add_tet(c, code);
  }
  if (mesh.element_count() == 0) throw ComputationError("generate_tet_mesh: no tets inside the labelled region");

  if (cfg_.snap_interfaces) {
    snap(mesh);
    // Snapping moves centroids; relabel once and let the new label sets pull
    // their nodes to the matching boundaries.
    if (relabel(mesh) > 0) snap(mesh);
  }

  const double s = vol_.spacing().x;
  for (auto& p : mesh.nodes) p *= s;
  return mesh;
}

std::size_t LatticeBuilder::relabel(TetMesh& mesh) const {
  std::size_t changed = 0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const Vec3 cen = tet_centroid(mesh, e);
    const LabelCode code = voxel_label(static_cast<std::int64_t>(std::floor(cen.x() + 0.5)),
                                       static_cast<std::int64_t>(std::floor(cen.y() + 0.5)),
                                       static_cast<std::int64_t>(std::floor(cen.z() + 0.5)));
    if (code == label::background || code == mesh.labels[e]) continue;
    mesh.labels[e] = code;
    ++changed;
  }
  return changed;
}

void LatticeBuilder::snap(TetMesh& mesh) const {
  const auto adj = build_face_adjacency(mesh);
  const auto n2e = build_node_element_map(mesh);
  std::vector<std::uint16_t> labels_at(mesh.node_count(), 0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto c = mesh.corners(e);
    for (auto n : c) labels_at[n] |= bit(mesh.labels[e]);
    for (int f = 0; f < 4; ++f)
      if (adj.is_boundary(e, f))
        for (int k : kTetFaces[f]) labels_at[c[k]] |= bit(label::background);
  }

  const Dims& d = vol_.dims();
  const double radius = std::max(2.0, 0.75 * b_);
  std::vector<std::uint32_t> moving;
  std::vector<Vec3> target;
  for (std::uint32_t v = 0; v < mesh.node_count(); ++v) {
    const std::uint16_t set = labels_at[v];
    if (std::popcount(set) < 2) continue;
    const Vec3 p = mesh.nodes[v];
    // Nodes where three or more labels meet go to a voxel edge shared by all
    // of them; the rest go to the nearest face between two of their labels.
    const bool junction = std::popcount(set) >= 3;
    double best = std::numeric_limits<double>::infinity(), best_edge = best;
    Vec3 q = p, q_edge = p;
    std::array<std::int64_t, 3> lo{}, hi{};
    const std::array<int, 3> n{d.nx, d.ny, d.nz};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max<std::int64_t>(-1, static_cast<std::int64_t>(std::floor(p[a] - radius)) - 1);
      hi[a] = std::min<std::int64_t>(n[a], static_cast<std::int64_t>(std::ceil(p[a] + radius)) + 1);
    }
    for (auto z = lo[2]; z <= hi[2]; ++z)
      for (auto y = lo[1]; y <= hi[1]; ++y)
        for (auto x = lo[0]; x <= hi[0]; ++x) {
          const std::array<std::int64_t, 3> xyz{x, y, z};
          const LabelCode la = voxel_label(x, y, z);
          for (int a = 0; a < 3; ++a) {
            I3 o{x, y, z};
            ++o[a];
            if (o[a] > hi[a]) continue;
            const LabelCode lb = voxel_label(o[0], o[1], o[2]);
            if (la == lb || !(set & bit(la)) || !(set & bit(lb))) continue;
            Vec3 cp;
            for (int k = 0; k < 3; ++k) {
              const double ck = static_cast<double>(xyz[k]);
              cp[k] = k == a ? ck + 0.5 : std::clamp(p[k], ck - 0.5, ck + 0.5);
            }
            const double dist = (cp - p).squaredNorm();
            if (dist < best) {
              best = dist;
              q = cp;
            }
          }
          if (!junction) continue;
          for (int a = 0; a < 3; ++a) {
            const int b1 = (a + 1) % 3, b2 = (a + 2) % 3;
            if (xyz[b1] + 1 > hi[b1] || xyz[b2] + 1 > hi[b2]) continue;
            std::uint16_t around = 0;
            for (int m = 0; m < 4; ++m) {
              I3 o{x, y, z};
              o[b1] += m & 1;
              o[b2] += m >> 1;
              around |= bit(voxel_label(o[0], o[1], o[2]));
            }
            if ((around & set) != set) continue;
            Vec3 cp;
            cp[a] = std::clamp(p[a], xyz[a] - 0.5, xyz[a] + 0.5);
            cp[b1] = static_cast<double>(xyz[b1]) + 0.5;
            cp[b2] = static_cast<double>(xyz[b2]) + 0.5;
            const double dist = (cp - p).squaredNorm();
            if (dist < best_edge) {
              best_edge = dist;
              q_edge = cp;
            }
          }
        }
    if (std::isfinite(best_edge)) {
      best = best_edge;
      q = q_edge;
    }
    if (std::isfinite(best) && best > 1e-18) {
      moving.push_back(v);
      target.push_back(q);
    }
  }

  auto worst = [&](std::uint32_t v) {
    double m = 180.0;
    for (auto e : n2e.of(v)) {
      const auto p = mesh.corner_points(e);
      m = std::min(m, min_dihedral_deg(p[0], p[1], p[2], p[3]));
    }
    return m;
  };


  std::size_t reached = 0;
  for (int sweep = 0; sweep < cfg_.snap_sweeps; ++sweep) {
    reached = 0;
    for (std::size_t i = 0; i < moving.size(); ++i) {
      const auto v = moving[i];
      const Vec3 start = mesh.nodes[v];
      if ((start - target[i]).squaredNorm() < 1e-18) {
        ++reached;
        continue;
      }
      const double floor = std::min(cfg_.snap_min_dihedral_deg, worst(v));
      for (double alpha : {1.0, 0.5, 0.25}) {
        mesh.nodes[v] = start + alpha * (target[i] - start);
        if (worst(v) >= floor) break;
        mesh.nodes[v] = start;
      }
      if ((mesh.nodes[v] - target[i]).squaredNorm() < 1e-18) ++reached;
    }
  }
  if (reached < moving.size()) {
    warn(diag_, fmt::format("generate_tet_mesh: {} of {} interface nodes stopped short of the label "
                            "boundary to keep tet quality",
                            moving.size() - reached, moving.size()));
  }
}

}  // namespace

double base_cell_size_voxels(const SizingField& sizing, double fill_factor,
                             std::span<const LabelCode> present_labels) {
  double vmin = std::numeric_limits<double>::infinity();
  for (LabelCode c : present_labels)
    if (c != label::background) vmin = std::min(vmin, sizing.max_volume(c));
  if (!std::isfinite(vmin)) vmin = sizing.default_max_volume;
  return std::cbrt(24.0 * fill_factor * vmin);
}

TetMesh generate_tet_mesh(const LabelVolume& vol, const SizingField& sizing, const MesherConfig& cfg,
                          Diagnostics* diag) {
  sizing.validate();
  if (vol.dims().nz < 2) throw InvalidArgument("generate_tet_mesh: degenerate volume (single slice)");
  if (!vol.is_isotropic()) throw InvalidArgument("generate_tet_mesh: volume must be isotropic");
  if (!(cfg.fill_factor > 0 && cfg.fill_factor <= 1)) throw InvalidArgument("fill factor must lie in (0, 1]");
  LatticeBuilder builder(vol, sizing, cfg, diag);
  return builder.build();
}

}  // namespace vox2fea::mesher
