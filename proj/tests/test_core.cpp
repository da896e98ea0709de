#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "vox2fea/core/components.hpp"
#include "vox2fea/core/distance.hpp"
#include "vox2fea/core/labelmap_io.hpp"
#include "vox2fea/core/material.hpp"
#include "vox2fea/mesher/structured.hpp"

using namespace vox2fea;

TEST_CASE("labelmap: all-background 2x2x1 volume loads") {
  const auto dir = testing::scratch_dir("core_io_zero");
  save_label_volume(LabelVolume({2, 2, 1}, {20, 20, 400}), dir / "z");
  const auto v = load_label_volume(dir / "z.json");
  CHECK(v.size() == 4);
  CHECK(v.count(label::background) == 4);
  CHECK(v.spacing() == Spacing{20, 20, 400});
}

TEST_CASE("labelmap: raw size mismatch is an error") {
  const auto dir = testing::scratch_dir("core_io_short");
  nlohmann::json meta{{"dims", {10, 10, 5}}, {"spacing_um", {20, 20, 400}}};
  std::ofstream(dir / "m.json") << meta.dump();
  std::ofstream(dir / "m.raw", std::ios::binary) << std::string(499, '\0');
  CHECK_THROWS_AS(load_label_volume(dir / "m"), FormatError);
}

TEST_CASE("labelmap: codes outside the palette and bad metadata are rejected") {
  const auto dir = testing::scratch_dir("core_io_bad");
  nlohmann::json meta{{"dims", {2, 1, 1}}, {"spacing_um", {1, 1, 1}}};
  std::ofstream(dir / "a.json") << meta.dump();
  std::ofstream(dir / "a.raw", std::ios::binary) << std::string("\x01\x09", 2);
  CHECK_THROWS_AS(load_label_volume(dir / "a"), FormatError);
  std::ofstream(dir / "b.json") << "{ not json";
  std::ofstream(dir / "b.raw", std::ios::binary) << std::string(2, '\0');
  CHECK_THROWS_AS(load_label_volume(dir / "b"), FormatError);
  CHECK_THROWS_AS(load_label_volume(dir / "missing"), FormatError);
}

TEST_CASE("labelmap: save/load round trip is exact") {
  const auto dir = testing::scratch_dir("core_io_rt");
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> code(0, 6);
  LabelVolume v({7, 5, 3}, {20, 20, 20});
  for (auto& x : v.voxels()) x = static_cast<LabelCode>(code(rng));
  v.frame_positions = {0, 2};
  save_label_volume(v, dir / "rt");
  const auto w = load_label_volume(dir / "rt.raw");
  CHECK(w == v);
  CHECK(w.frame_positions == v.frame_positions);
  CHECK(w.palette == v.palette);
}

TEST_CASE("components: two 3-voxel blobs and a single voxel") {
  LabelVolume v({10, 10, 1}, {1, 1, 1});
  for (int x = 0; x < 3; ++x) v.at(x, 0) = label::lipid;
  for (int x = 5; x < 8; ++x) v.at(x, 5) = label::lipid;
  v.at(9, 9) = label::calcium;
  const auto lipid = connected_components(v, label::lipid, Connectivity::planar8);
  REQUIRE(lipid.count() == 2);
  CHECK(lipid.size_of(1) == 3);
  CHECK(lipid.size_of(2) == 3);
  const auto calc = connected_components(v, label::calcium, Connectivity::planar8);
  REQUIRE(calc.count() == 1);
  CHECK(calc.size_of(1) == 1);
  CHECK(connected_components(v, label::lumen, Connectivity::planar8).count() == 0);
}

TEST_CASE("components: diagonal L shape is one 8-connected component") {
  LabelVolume v({4, 4, 1}, {1, 1, 1});
  v.at(0, 0) = v.at(1, 1) = v.at(2, 2) = v.at(2, 3) = label::wall;
  CHECK(connected_components(v, label::wall, Connectivity::planar8).count() == 1);
}

TEST_CASE("components: match brute-force flood fill on random volumes") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> side(1, trial < 10 ? 32 : 16);
    const Dims d{side(rng), side(rng), trial < 10 ? 1 : side(rng)};
    std::bernoulli_distribution on(0.35);
    std::vector<std::uint8_t> mask(d.count());
    for (auto& m : mask) m = on(rng);
    const auto cm = connected_components(mask, d, default_connectivity(d));
    std::vector<std::size_t> sizes = cm.sizes;
    std::sort(sizes.rbegin(), sizes.rend());
    CHECK(sizes == testing::brute_component_sizes(mask, d));
    const auto order = cm.by_size_descending();
    for (std::size_t i = 1; i < order.size(); ++i) CHECK(cm.size_of(order[i - 1]) >= cm.size_of(order[i]));
  }
}

TEST_CASE("distance: disk of radius 10 voxels has f(centre) near -200 um") {
  const auto f = testing::disk_frame(41, 10, label::calcium);
  const auto d = signed_distance(f, label::calcium);
  // Nearest boundary voxel centre of the digitised disk is (29, 21), which
  // sits 20 * hypot(9, 1) um away; within one voxel of the continuum radius.
  CHECK(d.at(20, 20) == doctest::Approx(-20 * std::hypot(9.0, 1.0)).epsilon(1e-12));
  CHECK(std::abs(d.at(20, 20) + 200) <= 20);
  // f = 0 exactly on boundary voxels of the label.
  const auto m = mask_of(f, label::calcium);
  const auto b = boundary_voxels(m, f.dims());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (b[i]) CHECK(d.values[i] == 0.0);
    if (m[i]) CHECK(d.values[i] <= 0.0);
    else CHECK(d.values[i] > 0.0);
  }
}

TEST_CASE("distance: empty label gives the positive sentinel") {
  const auto d = signed_distance(testing::disk_frame(9, 3, label::wall), label::lipid);
  CHECK(d.empty_source);
  for (double v : d.values) CHECK(v == kDistanceSentinelUm);
}

TEST_CASE("distance: exact against brute-force nearest boundary scan") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    std::uniform_int_distribution<int> side(2, 64);
    const Dims d{side(rng), side(rng), 1};
    const Spacing s{20, 20, 20};
    std::bernoulli_distribution on(0.3);
    std::vector<std::uint8_t> mask(d.count());
    for (auto& m : mask) m = on(rng);
    const auto field = signed_distance(mask, d, s);
    const auto b = boundary_voxels(mask, d);
    if (field.empty_source) continue;
    double worst = 0;
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        double best = 1e300;
        for (int v = 0; v < d.ny; ++v)
          for (int u = 0; u < d.nx; ++u)
            if (b[d.index(u, v, 0)]) best = std::min(best, std::hypot((x - u) * s.x, (y - v) * s.y));
        const double expect = mask[d.index(x, y, 0)] ? -best : best;
        worst = std::max(worst, std::abs(field.at(x, y) - expect));
      }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("distance: interface form against brute force") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    std::uniform_int_distribution<int> side(2, 40);
    const Dims d{side(rng), side(rng), 1};
    const Spacing s{20, 20, 20};
    std::bernoulli_distribution on(0.4);
    std::vector<std::uint8_t> mask(d.count());
    for (auto& m : mask) m = on(rng);
    mask[0] = 1;
    const auto field = interface_signed_distance(mask, d, s);
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const bool in = mask[d.index(x, y, 0)];
        double best = 1e300;
        for (int v = 0; v < d.ny; ++v)
          for (int u = 0; u < d.nx; ++u)
            if (static_cast<bool>(mask[d.index(u, v, 0)]) != in)
              best = std::min(best, std::hypot((x - u) * s.x, (y - v) * s.y));
        if (best > 1e299) continue;
        const double expect = in ? -(best - 10) : best - 10;
        CHECK(field.at(x, y) == doctest::Approx(expect).epsilon(1e-12));
        CHECK((field.at(x, y) <= 0) == in);
      }
  }
  const auto empty = interface_signed_distance(std::vector<std::uint8_t>(4, 0), {2, 2, 1}, {1, 1, 1});
  CHECK(empty.empty_source);
}

TEST_CASE("distance: 3D squared transform matches brute force") {
  std::mt19937 rng(5);
  const Dims d{9, 7, 6};
  const Spacing s{1, 2, 3};
  std::vector<std::uint8_t> sites(d.count(), 0);
  std::bernoulli_distribution on(0.05);
  for (auto& v : sites) v = on(rng);
  sites[0] = 1;
  const auto dt = squared_distance_transform(sites, d, s);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        double best = 1e300;
        for (int k = 0; k < d.nz; ++k)
          for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
              if (sites[d.index(i, j, k)]) {
                const double dx = (x - i) * s.x, dy = (y - j) * s.y, dz = (z - k) * s.z;
                best = std::min(best, dx * dx + dy * dy + dz * dz);
              }
        CHECK(dt[d.index(x, y, z)] == doctest::Approx(best).epsilon(1e-12));
      }
}

TEST_CASE("tet mesh: structured box is conformal and positively oriented") {
  const auto m = mesher::structured_box(3, 2, 2, 10.0);
  CHECK(m.element_count() == 3 * 2 * 2 * 6);
  double vol = 0;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    CHECK(tet_volume(m, e) > 0);
    vol += tet_volume(m, e);
  }
  CHECK(vol == doctest::Approx(3 * 2 * 2 * 1000.0));
  const auto adj = build_face_adjacency(m);
  CHECK(adj.nonmanifold_faces == 0);
  // Boundary of a 3x2x2 box: 2 triangles per unit square.
  CHECK(boundary_faces(m, adj).size() == 2 * 2 * (3 * 2 + 3 * 2 + 2 * 2));
}

TEST_CASE("tet mesh: outward face normals point away from the opposite corner") {
  TetMesh m;
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) m.add_node(p);
  m.add_tet({0, 1, 2, 3}, label::wall);
  const Vec3 c = tet_centroid(m, 0);
  for (std::uint8_t f = 0; f < 4; ++f) {
    const Vec3 n = outward_face_normal(m, {0, f});
    CHECK(n.dot(face_centroid(m, {0, f}) - c) > 0);
  }
  CHECK(face_area(m, {0, 0}) == doctest::Approx(0.5));
}

TEST_CASE("material: validation and linearisation") {
  HyperelasticPolynomial wall;
  wall.c10 = 127.9;
  wall.d = 0.096;
  const MaterialModel m{"WALL", wall};
  CHECK_NOTHROW(m.validate());
  const auto lin = linearize(m, 0.49);
  // mu0 = 2 C10 = 255.8 kPa; E = 2 mu0 (1 + nu).
  CHECK(lin.youngs_mpa == doctest::Approx(2 * 0.2558 * 1.49));
  CHECK(lin.poisson == 0.49);
  HyperelasticPolynomial bad = wall;
  bad.d = -1;
  CHECK_THROWS_AS((MaterialModel{"X", bad}.validate()), InvalidArgument);
  CHECK_THROWS_AS((MaterialModel{"X", LinearElastic{184, 0.5}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((MaterialModel{"X", LinearElastic{0, 0.3}}.validate()), InvalidArgument);
  const MaterialModel calc{"CALCIUM", LinearElastic{184, 0.495}};
  CHECK(linearize(calc).youngs_mpa == 184);
  CHECK(linearize(calc).poisson == 0.495);
}
