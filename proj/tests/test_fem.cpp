#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "inp_parser.hpp"
#include "support.hpp"
#include "vox2fea/fem/fea_model.hpp"
#include "vox2fea/fem/inp_writer.hpp"
#include "vox2fea/mesher/quadratic.hpp"
#include "vox2fea/mesher/structured.hpp"

using namespace vox2fea;
using namespace vox2fea::fem;

namespace {

using Tri = std::array<std::uint32_t, 3>;

Tri sorted_face(const TetMesh& m, std::size_t e, int f) {
  const auto c = m.corners(e);
  Tri t{c[kTetFaces[f][0]], c[kTetFaces[f][1]], c[kTetFaces[f][2]]};
  std::sort(t.begin(), t.end());
  return t;
}

// Tissue faces whose sorted corner triple also appears on some lumen element.
std::size_t brute_lumen_faces(const TetMesh& m) {
  std::multiset<Tri> lumen;
  for (std::size_t e = 0; e < m.element_count(); ++e)
    if (m.labels[e] == label::lumen)
      for (int f = 0; f < 4; ++f) lumen.insert(sorted_face(m, e, f));
  std::size_t n = 0;
  for (std::size_t e = 0; e < m.element_count(); ++e)
    if (m.labels[e] != label::lumen)
      for (int f = 0; f < 4; ++f) n += lumen.count(sorted_face(m, e, f));
  return n;
}

bool inside_tet(const std::array<Vec3, 4>& t, const Vec3& p) {
  const double v = signed_volume(t[0], t[1], t[2], t[3]);
  const double b[4] = {signed_volume(p, t[1], t[2], t[3]), signed_volume(t[0], p, t[2], t[3]),
                       signed_volume(t[0], t[1], p, t[3]), signed_volume(t[0], t[1], t[2], p)};
  for (double x : b)
    if (x / v < -1e-9) return false;
  return true;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void check_golden(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::path(VOX2FEA_GOLDEN_DIR) / name;
  if (std::getenv("VOX2FEA_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << text;
    MESSAGE("updated " << path.string());
  }
  REQUIRE(std::filesystem::exists(path));
  CHECK(slurp(path) == text);
}

}  // namespace

TEST_CASE("boundary spec validation") {
  BoundarySpec s;
  CHECK_NOTHROW(s.validate());
  s.pressure_kpa = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = {};
  s.endcap_tolerance_um = -1;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = {};
  s.load_surface_name.clear();
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("lumen surface matches face enumeration") {
  const TetMesh m = testing::tiny_vessel();
  const auto surf = extract_lumen_surface(m);
  CHECK(surf.size() == brute_lumen_faces(m));
  // 2 x 2 lumen core over two layers: 8 side squares per layer, 2 tris each.
  CHECK(surf.size() == 32);
  CHECK(std::is_sorted(surf.begin(), surf.end()));
  for (const auto& f : surf) CHECK(m.labels[f.element] != label::lumen);

  SUBCASE("normals point into the lumen") {
    for (const auto& f : surf) {
      const Vec3 probe = face_centroid(m, f) + 0.5 * outward_face_normal(m, f);
      bool in_lumen = false;
      for (std::size_t e = 0; e < m.element_count() && !in_lumen; ++e)
        in_lumen = m.labels[e] == label::lumen && inside_tet(m.corner_points(e), probe);
      CHECK(in_lumen);
    }
  }

  SUBCASE("no lumen") {
    const TetMesh box = mesher::structured_box(2, 2, 2, 20.0);
    CHECK_THROWS_AS(extract_lumen_surface(box), InvalidArgument);
  }
}

TEST_CASE("lumen surface on a structured annulus with a filled core") {
  TetMesh tube = mesher::structured_annulus(100.0, 200.0, 80.0, 2, 24, 4);
  for (std::size_t e = 0; e < tube.element_count(); ++e) {
    const Vec3 c = tet_centroid(tube, e);
    if (std::hypot(c.x(), c.y()) < 150.0) tube.labels[e] = label::lumen;
  }
  const auto surf = extract_lumen_surface(tube);
  CHECK(surf.size() == brute_lumen_faces(tube));
  CHECK(surf.size() == 2 * 24 * 4);
}

TEST_CASE("remove_lumen renumbers consistently") {
  TetMesh m = testing::tiny_vessel();
  m.surfaces[kLumenSurface] = extract_lumen_surface(m);
  m.node_sets["ALL"].resize(m.node_count());
  for (std::uint32_t i = 0; i < m.node_count(); ++i) m.node_sets["ALL"][i] = i;
  const auto r = remove_lumen(m);

  std::size_t lumen_elems = std::count(m.labels.begin(), m.labels.end(), label::lumen);
  CHECK(r.mesh.element_count() == m.element_count() - lumen_elems);
  CHECK(std::count(r.mesh.labels.begin(), r.mesh.labels.end(), label::lumen) == 0);
  // Only the 3 x 3 x 3 column-interior vertex line at x = y = 60 is lumen-only.
  CHECK(r.mesh.node_count() == m.node_count() - 3);
  for (std::size_t n = 0; n < m.node_count(); ++n)
    if (r.node_map[n] >= 0) CHECK((r.mesh.nodes[r.node_map[n]] - m.nodes[n]).norm() == 0.0);
    else CHECK((m.nodes[n] - Vec3(60, 60, m.nodes[n].z())).norm() == 0.0);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    if (r.element_map[e] < 0) continue;
    const auto a = m.corners(e), b = r.mesh.corners(r.element_map[e]);
    for (int k = 0; k < 4; ++k) CHECK(b[k] == r.node_map[a[k]]);
  }
  CHECK(r.mesh.node_sets.at("ALL").size() == r.mesh.node_count());
  const auto& surf = r.mesh.surfaces.at(kLumenSurface);
  CHECK(surf.size() == 32);
  for (const auto& f : surf) CHECK(f.element < r.mesh.element_count());
  // The surface is now the boundary of the cavity.
  const auto adj = build_face_adjacency(r.mesh);
  for (const auto& f : surf) CHECK(adj.is_boundary(f.element, f.face));

  SUBCASE("no lumen is the identity") {
    const TetMesh box = mesher::structured_box(2, 1, 1, 20.0);
    const auto id = remove_lumen(box);
    CHECK(id.mesh.nodes == box.nodes);
    CHECK(id.mesh.connectivity == box.connectivity);
  }
}

TEST_CASE("end caps") {
  const TetMesh m = testing::tiny_vessel();
  BoundarySpec spec;
  spec.endcap_tolerance_um = 20.0;
  const auto wide = find_endcap_nodes(m, spec);
  spec.endcap_tolerance_um = 10.0;
  const auto narrow = find_endcap_nodes(m, spec);
  spec.endcap_tolerance_um = 1e-6;
  const auto planes = find_endcap_nodes(m, spec);

  auto scan = [&](double z0, double tol) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t n = 0; n < m.node_count(); ++n)
      if (std::abs(m.nodes[n].z() - z0) <= tol) out.push_back(n);
    return out;
  };
  CHECK(planes.zmin == scan(0.0, 1e-6));
  CHECK(planes.zmax == scan(40.0, 1e-6));
  CHECK(planes.zmin.size() == 49);
  CHECK(wide.zmin == scan(0.0, 20.0));
  CHECK(wide.zmin.size() == 98);
  CHECK(std::includes(wide.zmin.begin(), wide.zmin.end(), narrow.zmin.begin(), narrow.zmin.end()));
  CHECK(std::includes(wide.zmax.begin(), wide.zmax.end(), narrow.zmax.begin(), narrow.zmax.end()));
  CHECK_THROWS_AS(find_endcap_nodes(TetMesh{}, BoundarySpec{}), InvalidArgument);
}

TEST_CASE("material cards") {
  const auto cards = material_cards();
  CHECK(cards.at(label::wall).hyperelastic().c10 == doctest::Approx(127.9));
  CHECK(cards.at(label::wall).hyperelastic().d == doctest::Approx(0.096));
  CHECK(cards.at(label::wall).hyperelastic().c20 == 0.0);
  CHECK(cards.at(label::lipid).hyperelastic().c10 == doctest::Approx(1.6));
  CHECK(cards.at(label::lipid).hyperelastic().c20 == doctest::Approx(9.3));
  CHECK(cards.at(label::lipid).hyperelastic().c30 == doctest::Approx(11.0));
  CHECK(cards.at(label::lipid).hyperelastic().d == 0.0);
  CHECK(cards.at(label::calcium).linear().youngs_mpa == doctest::Approx(184.0));
  CHECK(cards.at(label::calcium).linear().poisson == doctest::Approx(0.495));
  CHECK(cards.at(label::inner_refine).name == "WALL");
  CHECK(cards.at(label::outer_refine).name == "WALL");
  for (const auto& [code, m] : cards) CHECK_NOTHROW(m.validate());
}

TEST_CASE("fea model assembly") {
  const TetMesh m = testing::tiny_vessel();
  const FeaModel model = build_fea_model(m);
  CHECK_NOTHROW(model.validate());
  CHECK(model.mesh.surfaces.at(kLumenSurface).size() == 32);
  CHECK(model.fixed_node_sets == std::vector<std::string>{kEndcapMin, kEndcapMax});
  CHECK(model.materials.size() == 3);

  const FeaModel quad = build_fea_model(m, {}, ElementOrder::quadratic);
  CHECK(quad.mesh.order == ElementOrder::quadratic);
  // Midside nodes on the caps are fixed as well.
  CHECK(quad.mesh.node_sets.at(kEndcapMin).size() > model.mesh.node_sets.at(kEndcapMin).size());

  FeaModel broken = model;
  broken.materials.erase(label::lipid);
  CHECK_THROWS_AS(broken.validate(), InvalidArgument);
  broken = model;
  broken.mesh.node_sets.at(kEndcapMax).clear();
  CHECK_THROWS_AS(broken.validate(), InvalidArgument);
  CHECK_THROWS_AS(format_inp(broken), InvalidArgument);
  CHECK_THROWS_AS(build_fea_model(mesher::structured_box(1, 1, 1, 20.0)), InvalidArgument);
}

TEST_CASE("minimal one-tet model") {
  TetMesh m;
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(20, 0, 0), Vec3(0, 20, 0), Vec3(0, 0, 20)}) m.add_node(p);
  m.add_tet({0, 1, 2, 3}, label::wall);
  m.surfaces[kLumenSurface] = {{0, 0}};
  m.node_sets[kEndcapMin] = {0, 1, 2};
  m.node_sets[kEndcapMax] = {3};
  FeaModel model;
  model.mesh = m;
  model.materials = {{label::wall, material_cards().at(label::wall)}};
  model.fixed_node_sets = {kEndcapMin, kEndcapMax};
  const auto inp = testing::parse_inp(format_inp(model));
  CHECK(inp.nodes.size() == 4);
  CHECK(inp.elements.size() == 1);
  CHECK(inp.element_type == "C3D4H");
  for (const char* k : {"NODE", "ELEMENT", "ELSET", "SURFACE", "NSET", "SOLID SECTION", "MATERIAL",
                        "HYPERELASTIC", "BOUNDARY", "STEP", "DSLOAD", "END STEP"})
    CHECK(std::find(inp.keywords.begin(), inp.keywords.end(), k) != inp.keywords.end());
  CHECK(inp.nodes.at(2)[0] == doctest::Approx(0.02));
}

TEST_CASE("keyword file round trip") {
  const TetMesh m = testing::tiny_vessel();
  for (auto order : {ElementOrder::linear, ElementOrder::quadratic}) {
    CAPTURE(static_cast<int>(order));
    const FeaModel model = build_fea_model(m, {}, order);
    const std::string text = format_inp(model);
    const auto inp = testing::parse_inp(text);

    CHECK(inp.nodes.size() == model.mesh.node_count());
    CHECK(inp.elements.size() == model.mesh.element_count());
    CHECK(inp.element_type == (order == ElementOrder::linear ? "C3D4H" : "C3D10H"));
    for (const auto& [id, nodes] : inp.elements) CHECK(nodes.size() == std::size_t(model.mesh.nodes_per_element()));
    for (std::size_t n = 0; n < model.mesh.node_count(); ++n)
      for (int k = 0; k < 3; ++k) CHECK(inp.nodes.at(long(n) + 1)[k] == doctest::Approx(model.mesh.nodes[n][k] / 1000.0));

    // Section order on the file.
    const std::vector<std::string> expected{"HEADING", "NODE",          "ELEMENT", "ELSET",   "SURFACE",
                                            "NSET",    "SOLID SECTION", "MATERIAL", "BOUNDARY", "STEP"};
    std::size_t pos = 0;
    for (const auto& k : inp.keywords)
      if (pos < expected.size() && k == expected[pos]) ++pos;
    CHECK(pos == expected.size());

    // Every element in exactly one elset, every elset with a section.
    std::map<long, int> hits;
    for (const auto& [name, ids] : inp.elsets) {
      CHECK(inp.sections.count(name) == 1);
      CHECK(inp.materials.count(inp.sections.at(name)) == 1);
      for (long id : ids) ++hits[id];
    }
    CHECK(hits.size() == inp.elements.size());
    for (const auto& [id, n] : hits) CHECK(n == 1);
    CHECK(inp.elsets.at("LIPID").size() == std::size_t(std::count(m.labels.begin(), m.labels.end(), label::lipid)));

    CHECK(inp.surfaces.at(kLumenSurface).size() == 32);
    CHECK(inp.nsets.at(kEndcapMin).size() == model.mesh.node_sets.at(kEndcapMin).size());
    CHECK(inp.nsets.at(kEndcapMax).size() == model.mesh.node_sets.at(kEndcapMax).size());

    const auto& wall = inp.materials.at("WALL");
    CHECK(wall.kind == "HYPERELASTIC");
    REQUIRE(wall.values.size() == 12);
    CHECK(wall.values[0] == doctest::Approx(0.1279));
    CHECK(wall.values[9] == doctest::Approx(96.0));
    const auto& lipid = inp.materials.at("LIPID");
    REQUIRE(lipid.values.size() == 12);
    CHECK(lipid.values[0] == doctest::Approx(0.0016));
    CHECK(lipid.values[2] == 0.0093);
    CHECK(lipid.values[3] == 0.0);
    CHECK(lipid.values[5] == doctest::Approx(0.011));
    const auto& calcium = inp.materials.at("CALCIUM");
    CHECK(calcium.kind == "ELASTIC");
    CHECK(calcium.values == std::vector<double>{184.0, 0.495});

    REQUIRE(inp.boundaries.size() == 2);
    for (const auto& [set, first, last] : inp.boundaries) {
      CHECK(first == 1);
      CHECK(last == 3);
    }
    REQUIRE(inp.dsloads.size() == 1);
    CHECK(std::get<0>(inp.dsloads[0]) == kLumenSurface);
    CHECK(std::get<1>(inp.dsloads[0]) == "P");
    CHECK(std::get<2>(inp.dsloads[0]) == doctest::Approx(0.015));

    CHECK(format_inp(model) == text);
  }
}

TEST_CASE("plain element types") {
  const FeaModel model = build_fea_model(testing::tiny_vessel());
  const auto inp = testing::parse_inp(format_inp(model, {.hybrid = false}));
  CHECK(inp.element_type == "C3D4");
}

TEST_CASE("golden keyword files") {
  const TetMesh m = testing::small_vessel();
  BoundarySpec spec;
  spec.endcap_tolerance_um = 5.0;
  const FeaModel lin = build_fea_model(m, spec);
  const FeaModel quad = build_fea_model(m, spec, ElementOrder::quadratic);
  check_golden("small_linear.inp", format_inp(lin));
  check_golden("small_quadratic.inp", format_inp(quad));

  const auto dir = testing::scratch_dir("fem_golden");
  write_inp(lin, dir / "a.inp");
  CHECK(slurp(dir / "a.inp") == format_inp(lin));
  CHECK_THROWS_AS(write_inp(lin, dir / "missing" / "a.inp"), Error);
}
