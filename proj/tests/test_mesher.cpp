#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "vox2fea/mesher/lattice_mesher.hpp"
#include "vox2fea/mesher/optimize.hpp"
#include "vox2fea/mesher/quadratic.hpp"
#include "vox2fea/mesher/quality.hpp"
#include "vox2fea/mesher/structured.hpp"
#include "vox2fea/mesher/vtk_io.hpp"
#include "vox2fea/preprocess/preprocess.hpp"

using namespace vox2fea;
using namespace vox2fea::mesher;

namespace {

constexpr double kVox = 20.0;

LabelVolume sphere_in_wall(int n, double r) {
  LabelVolume v({n, n, n}, {kVox, kVox, kVox}, label::wall);
  const double c = (n - 1) / 2.0;
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (std::hypot(x - c, y - c, z - c) <= r) v.at(x, y, z) = label::calcium;
  return v;
}

LabelVolume annulus_volume(int n, int nz, double a, double b) {
  LabelVolume v({n, n, nz}, {kVox, kVox, kVox});
  const double c = (n - 1) / 2.0;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double r = std::hypot(x - c, y - c);
        if (r <= a) v.at(x, y, z) = label::lumen;
        else if (r <= b) v.at(x, y, z) = label::wall;
      }
  return v;
}

// Voxel holding a point given in micrometres.
std::array<int, 3> voxel_of(const Vec3& p) {
  return {static_cast<int>(std::lround(p.x() / kVox)), static_cast<int>(std::lround(p.y() / kVox)),
          static_cast<int>(std::lround(p.z() / kVox))};
}

std::size_t count_unique_edges(const TetMesh& m) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const auto c = m.corners(e);
    for (const auto& ed : kTetEdges) edges.insert(std::minmax(c[ed[0]], c[ed[1]]));
  }
  return edges.size();
}

// Nodes on the outer surface or shared by tets of different labels.
std::vector<bool> constrained_nodes(const TetMesh& m) {
  std::vector<bool> out(m.node_count(), false);
  const auto adj = build_face_adjacency(m);
  for (const auto& f : boundary_faces(m, adj))
    for (auto n : m.face_nodes(f)) out[n] = true;
  for (std::size_t e = 0; e < m.element_count(); ++e)
    for (int f = 0; f < 4; ++f) {
      if (adj.is_boundary(e, f)) continue;
      if (m.labels[adj.neighbour[4 * e + f]] != m.labels[e])
        for (auto n : m.face_nodes({static_cast<std::uint32_t>(e), static_cast<std::uint8_t>(f)})) out[n] = true;
    }
  return out;
}

}  // namespace

TEST_CASE("sizing: derived layer volumes and validation") {
  const auto s = SizingField::from_inner(2.83);
  CHECK(s.max_volume(label::inner_refine) == doctest::Approx(2.83));
  CHECK(s.max_volume(label::outer_refine) == doctest::Approx(5.66));
  CHECK(s.max_volume(label::wall) == doctest::Approx(22.64));
  CHECK(s.max_volume(label::calcium) == doctest::Approx(22.64));
  CHECK_NOTHROW(s.validate());
  SizingField bad = s;
  bad.max_tet_volume_by_label[label::inner_refine] = 10;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = s;
  bad.max_tet_volume_by_label[label::lipid] = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("generate: uniform wall cube is conformal and fills the cube") {
  const LabelVolume v({12, 12, 12}, {kVox, kVox, kVox}, label::wall);
  SizingField s;
  s.default_max_volume = 8;
  const auto m = generate_tet_mesh(v, s);
  const auto q = validate_mesh(m, &v);
  CHECK(q.valid());
  CHECK(q.nonconformal_faces == 0);
  CHECK(q.label_counts.size() == 1);
  CHECK(q.label_counts.count(label::wall) == 1);
  CHECK(std::abs(q.volume_error.at(label::wall)) < 0.05);
  for (std::size_t e = 0; e < m.element_count(); ++e)
    CHECK(tet_volume(m, e) <= 8 * kVox * kVox * kVox * (1 + 1e-9));
}

TEST_CASE("generate: calcium sphere keeps its boundary within 1.5 voxels") {
  const auto v = sphere_in_wall(28, 9.5);
  SizingField sizing;
  sizing.default_max_volume = 8;
  const auto m = generate_tet_mesh(v, sizing);
  const auto q = validate_mesh(m, &v);
  CHECK(q.valid());
  for (auto code : m.labels) CHECK((code == label::wall || code == label::calcium));
  CHECK(q.hausdorff_voxels.at(label::calcium) <= 1.5);
  CHECK(q.hausdorff_voxels.at(label::wall) <= 1.5);
  CHECK(std::abs(q.volume_error.at(label::calcium)) < 0.05);
  CHECK(std::abs(q.volume_error.at(label::wall)) < 0.05);
  // Determinism.
  const auto again = generate_tet_mesh(v, sizing);
  CHECK(again.nodes == m.nodes);
  CHECK(again.connectivity == m.connectivity);
  CHECK(again.labels == m.labels);
}

TEST_CASE("generate: refinement layers multiply elements near the lumen and grade sizes") {
  const auto plain = annulus_volume(130, 12, 18, 60);
  const preprocess::PreprocessConfig cfg;
  const auto layered = preprocess::build_refinement_layers(plain, cfg);
  const auto sizing = SizingField::from_inner(2.83);
  const auto with = generate_tet_mesh(layered, sizing);
  const auto without = generate_tet_mesh(plain, sizing);
  const auto in_inner_region = [&](const TetMesh& m, std::size_t e) {
    const auto c = voxel_of(tet_centroid(m, e));
    if (!layered.dims().contains(c[0], c[1], c[2])) return false;
    return layered.at(c[0], c[1], c[2]) == label::inner_refine;
  };
  std::size_t n_with = 0, n_without = 0;
  for (std::size_t e = 0; e < with.element_count(); ++e) n_with += in_inner_region(with, e);
  for (std::size_t e = 0; e < without.element_count(); ++e) n_without += in_inner_region(without, e);
  CAPTURE(n_with);
  CAPTURE(n_without);
  CHECK(n_with > 4 * n_without);

  std::map<LabelCode, double> total;
  std::map<LabelCode, std::size_t> count;
  for (std::size_t e = 0; e < with.element_count(); ++e) {
    total[with.labels[e]] += tet_volume(with, e);
    ++count[with.labels[e]];
  }
  const auto mean = [&](LabelCode c) { return total[c] / static_cast<double>(count[c]); };
  CHECK(mean(label::inner_refine) <= mean(label::outer_refine));
  CHECK(mean(label::outer_refine) <= mean(label::wall));
  CHECK(validate_mesh(with).valid());
}

TEST_CASE("generate: rejects degenerate input") {
  CHECK_THROWS_AS(generate_tet_mesh(LabelVolume({8, 8, 1}, {kVox, kVox, kVox}, label::wall), SizingField{}),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_tet_mesh(LabelVolume({8, 8, 8}, {kVox, kVox, 40}, label::wall), SizingField{}),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_tet_mesh(LabelVolume({8, 8, 8}, {kVox, kVox, kVox}), SizingField{}), InvalidArgument);
}

TEST_CASE("optimize: a good mesh is left alone") {
  const auto m = structured_box(3, 3, 3, kVox);
  const auto before = validate_mesh(m);
  const auto [out, q] = optimize_mesh(m);
  CHECK(q.min_dihedral_deg == doctest::Approx(before.min_dihedral_deg));
  CHECK(out.nodes == m.nodes);
  CHECK(out.connectivity == m.connectivity);
}

TEST_CASE("optimize: sliver-seeded mesh ends with no inverted tets") {
  auto m = structured_box(4, 4, 4, kVox);
  // Push the interior node at (1, 1, 1) cells well past its neighbours.
  std::uint32_t target = 0;
  for (std::uint32_t n = 0; n < m.node_count(); ++n)
    if ((m.nodes[n] - Vec3(2 * kVox, 2 * kVox, 2 * kVox)).norm() < 1e-9) target = n;
  m.nodes[target] += Vec3(1.3 * kVox, 0.2 * kVox, -0.1 * kVox);
  const auto seeded = validate_mesh(m);
  REQUIRE(seeded.inverted_count > 0);
  const auto [out, q] = optimize_mesh(m);
  CHECK(q.inverted_count == 0);
  CHECK(validate_mesh(out).inverted_count == 0);
}

TEST_CASE("optimize: label-boundary nodes move at most half a voxel") {
  const auto v = sphere_in_wall(20, 5.5);
  const auto m = generate_tet_mesh(v, SizingField::from_inner(2.83));
  OptimizeConfig cfg;
  cfg.voxel_um = kVox;
  cfg.target_min_dihedral_deg = 25;  // force work
  const auto [out, q] = optimize_mesh(m, cfg);
  const auto constrained = constrained_nodes(m);
  double worst = 0;
  for (std::size_t n = 0; n < m.node_count(); ++n)
    if (constrained[n]) worst = std::max(worst, (out.nodes[n] - m.nodes[n]).norm());
  CHECK(worst <= 0.5 * kVox);
  CHECK(worst <= cfg.max_interface_shift_voxels * kVox + 1e-9);
  CHECK(q.inverted_count == 0);
  CHECK(q.min_dihedral_deg >= validate_mesh(m).min_dihedral_deg - 1e-9);
  CHECK(out.labels.size() == out.element_count());
}

TEST_CASE("quadratic: node counts follow V + E") {
  TetMesh one;
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) one.add_node(p);
  one.add_tet({0, 1, 2, 3}, label::wall);
  const auto q1 = to_quadratic(one);
  CHECK(q1.node_count() == 10);
  CHECK(q1.order == ElementOrder::quadratic);
  CHECK_THROWS_AS(to_quadratic(q1), InvalidArgument);

  TetMesh two = one;
  two.add_node(Vec3(1, 1, 1));
  two.add_tet({1, 2, 3, 4}, label::wall);
  if (tet_volume(two, 1) < 0) {
    two.connectivity.resize(4);
    two.labels.resize(1);
    two.add_tet({2, 1, 3, 4}, label::wall);
  }
  CHECK(to_quadratic(two).node_count() == 14);

  std::mt19937 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = testing::random_mesh(rng);
    const auto q = to_quadratic(m);
    CHECK(q.node_count() == m.node_count() + count_unique_edges(m));
    for (std::size_t e = 0; e < q.element_count(); ++e) {
      const auto el = q.element(e);
      for (int i = 0; i < 6; ++i) {
        const Vec3 mid = 0.5 * (q.nodes[el[kTetEdges[i][0]]] + q.nodes[el[kTetEdges[i][1]]]);
        CHECK((q.nodes[el[4 + i]] - mid).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("validate: clean mesh and a mesh with a missing interior tet") {
  auto m = structured_box(3, 3, 3, kVox);
  const auto q = validate_mesh(m);
  CHECK(q.valid());
  CHECK(q.min_dihedral_deg > 30);
  CHECK(q.element_count == m.element_count());
  // Remove one tet of the centre cube; its four faces now bound a void.
  const Vec3 centre(1.5 * kVox, 1.5 * kVox, 1.5 * kVox);
  std::size_t victim = 0;
  double best = 1e300;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const double d = (tet_centroid(m, e) - centre).norm();
    if (d < best) best = d, victim = e;
  }
  TetMesh holed;
  holed.nodes = m.nodes;
  for (std::size_t e = 0; e < m.element_count(); ++e)
    if (e != victim) holed.add_tet(m.corners(e), m.labels[e]);
  const auto qh = validate_mesh(holed);
  CHECK(qh.dangling_faces == 4);
  CHECK_FALSE(qh.valid());
}

TEST_CASE("validate: inverted tet and non-manifold face are flagged") {
  auto m = structured_box(1, 1, 1, kVox);
  auto c = m.corners(0);
  std::swap(c[0], c[1]);
  std::copy(c.begin(), c.end(), m.element(0).begin());
  CHECK(validate_mesh(m).inverted_count == 1);
  auto dup = structured_box(1, 1, 1, kVox);
  dup.add_tet(dup.corners(0), label::wall);
  CHECK(validate_mesh(dup).nonconformal_faces > 0);
}

TEST_CASE("point-triangle distance against sampled minimum") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    const Vec3 p(u(rng), u(rng), u(rng));
    double best = 1e300;
    const int n = 200;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const Vec3 q = a + (b - a) * (i / double(n)) + (c - a) * (j / double(n));
        best = std::min(best, (p - q).norm());
      }
    const double d = point_triangle_distance(p, a, b, c);
    CHECK(d <= best + 1e-12);
    CHECK(d >= best - 0.05);
  }
}

TEST_CASE("vtk: write and read back exactly") {
  const auto dir = testing::scratch_dir("mesher_vtk");
  std::mt19937 rng(8);
  const auto m = testing::random_mesh(rng);
  write_vtk(m, dir / "m.vtk");
  const auto r = read_vtk(dir / "m.vtk");
  CHECK(r.nodes == m.nodes);
  CHECK(r.connectivity == m.connectivity);
  CHECK(r.labels == m.labels);
  const auto q = to_quadratic(m);
  write_vtk(q, dir / "q.vtk");
  const auto rq = read_vtk(dir / "q.vtk");
  CHECK(rq.order == ElementOrder::quadratic);
  CHECK(rq.connectivity == q.connectivity);
  CHECK(rq.nodes == q.nodes);
  CHECK_THROWS_AS(read_vtk(dir / "missing.vtk"), FormatError);
}
