#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "vox2fea/core/components.hpp"
#include "vox2fea/preprocess/preprocess.hpp"

using namespace vox2fea;
using namespace vox2fea::preprocess;

namespace {

constexpr double kPx = 20.0;

// Centred ring of `code` between radii a and b (pixels) in an n x n frame;
// the inside is lumen when `with_lumen`, background otherwise.
LabelVolume ring_frame(int n, double a, double b, LabelCode code = label::wall, bool with_lumen = true) {
  LabelVolume f({n, n, 1}, {kPx, kPx, kPx});
  const double c = (n - 1) / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double r = std::hypot(x - c, y - c);
      if (r <= a) f.at(x, y) = with_lumen ? label::lumen : label::background;
      else if (r <= b) f.at(x, y) = code;
    }
  return f;
}

double angle_deg(double x, double y, double c) {
  double a = std::atan2(y - c, x - c) * 180.0 / std::numbers::pi;
  return a < 0 ? a + 360 : a;
}

// Length of the first tissue run met along a ray from the centre, in um,
// sampled every tenth of a pixel.
double radial_tissue_run_um(const LabelVolume& f, double theta_deg) {
  const double c = (f.dims().nx - 1) / 2.0;
  const double t = theta_deg * std::numbers::pi / 180.0;
  double start = -1;
  for (double r = 0; r < f.dims().nx; r += 0.1) {
    const int x = static_cast<int>(std::lround(c + r * std::cos(t)));
    const int y = static_cast<int>(std::lround(c + r * std::sin(t)));
    if (!f.dims().contains(x, y, 0)) break;
    const LabelCode v = f.at(x, y);
    const bool tissue = v == label::wall || v == label::lipid || v == label::calcium;
    if (tissue && start < 0) start = r;
    if (!tissue && start >= 0) return (r - start) * kPx;
  }
  return start < 0 ? 0 : 1e9;
}

double min_distance_to_label_um(const LabelVolume& f, int x, int y, LabelCode code) {
  double best = 1e300;
  for (int v = 0; v < f.dims().ny; ++v)
    for (int u = 0; u < f.dims().nx; ++u)
      if (f.at(u, v) == code) best = std::min(best, std::hypot(u - x, v - y) * kPx);
  return best;
}

}  // namespace

TEST_CASE("config: defaults and validation") {
  PreprocessConfig cfg;
  CHECK(cfg.min_component_area_px == 150);
  CHECK(cfg.min_wall_thickness_um == 500);
  CHECK(cfg.lipid_cap_thickness_um == 200);
  CHECK_NOTHROW(cfg.validate());
  cfg.outer_refine_radius_um = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("pool: fibrous and mixed become wall, other labels kept") {
  LabelVolume f({4, 4, 1}, {kPx, kPx, kPx});
  f.palette = raw_segmentation_palette();
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) f.at(x, y) = ((x + y) % 2) ? raw_label::fibrous : raw_label::mixed;
  f.at(0, 0) = raw_label::lipid;
  f.at(1, 0) = raw_label::calcium;
  f.at(2, 0) = raw_label::background;
  const auto p = pool_labels(f);
  CHECK(p.at(0, 0) == label::lipid);
  CHECK(p.at(1, 0) == label::calcium);
  CHECK(p.at(2, 0) == label::background);
  CHECK(p.count(label::wall) == 13);
  CHECK(p.palette == standard_palette());
  f.at(3, 3) = 5;
  CHECK_THROWS_AS(pool_labels(f), InvalidArgument);
}

TEST_CASE("isolate lumen: interior of an annulus becomes lumen") {
  const auto f = ring_frame(61, 10, 20, label::wall, false);
  const auto out = isolate_lumen(f);
  const auto expect = ring_frame(61, 10, 20, label::wall, true);
  CHECK(out == expect);
  CHECK(connected_components(out, label::lumen, Connectivity::planar8).count() == 1);
}

TEST_CASE("isolate lumen: two cavities of 50 and 20 px") {
  LabelVolume f({30, 30, 1}, {kPx, kPx, kPx});
  for (int y = 5; y < 25; ++y)
    for (int x = 5; x < 25; ++x) f.at(x, y) = label::wall;
  for (int y = 8; y < 13; ++y)
    for (int x = 8; x < 18; ++x) f.at(x, y) = label::background;  // 50 px
  for (int y = 16; y < 20; ++y)
    for (int x = 8; x < 13; ++x) f.at(x, y) = label::background;  // 20 px
  Diagnostics diag;
  const auto out = isolate_lumen(f, &diag);
  CHECK(out.count(label::lumen) == 50);
  CHECK(out.at(8, 8) == label::lumen);
  CHECK(out.at(8, 16) == label::background);
  REQUIRE(diag.warnings.size() == 1);
  CHECK(diag.warnings[0].find("20 px") != std::string::npos);
}

TEST_CASE("isolate lumen: solid disk has no lumen") {
  CHECK_THROWS_AS(isolate_lumen(testing::disk_frame(31, 10, label::wall)), InvalidArgument);
}

TEST_CASE("filter: specks are absorbed, calcium is exempt, 150 px is kept") {
  PreprocessConfig cfg;
  LabelVolume f({80, 80, 1}, {kPx, kPx, kPx}, label::wall);
  for (int y = 5; y < 7; ++y)
    for (int x = 5; x < 10; ++x) f.at(x, y) = label::lipid;  // 10 px
  for (int y = 5; y < 7; ++y)
    for (int x = 20; x < 25; ++x) f.at(x, y) = label::calcium;  // 10 px
  for (int y = 30; y < 40; ++y)
    for (int x = 10; x < 25; ++x) f.at(x, y) = label::lipid;  // 150 px
  for (int y = 50; y < 60; ++y)
    for (int x = 10; x < 25; ++x) f.at(x, y) = label::lipid;
  f.at(24, 59) = label::wall;  // 149 px
  const auto out = filter_small_components(f, cfg);
  CHECK(out.at(6, 5) == label::wall);
  CHECK(out.count(label::calcium) == 10);
  CHECK(out.at(10, 30) == label::lipid);
  CHECK(out.at(10, 50) == label::wall);
  CHECK(out.count(label::lipid) == 150);
  CHECK(filter_small_components(out, cfg) == out);
}

TEST_CASE("wall thickness: thin annulus is grown to 500 um on every ray") {
  PreprocessConfig cfg;
  const auto f = ring_frame(161, 30, 45);  // 300 um wall
  const auto out = enforce_wall_thickness(f, cfg);
  double worst = 1e9;
  for (int deg = 0; deg < 360; ++deg) worst = std::min(worst, radial_tissue_run_um(out, deg));
  CHECK(worst >= 500 - kPx * std::sqrt(2.0));
  CHECK(out.count(label::lumen) == f.count(label::lumen));
  CHECK(enforce_wall_thickness(out, cfg) == out);
}

TEST_CASE("wall thickness: thick wall is unchanged") {
  PreprocessConfig cfg;
  const auto f = ring_frame(161, 30, 60);  // 600 um
  CHECK(enforce_wall_thickness(f, cfg) == f);
}

TEST_CASE("wall thickness: only a thin sector is thickened") {
  PreprocessConfig cfg;
  auto f = ring_frame(161, 30, 66);  // 720 um
  const double c = 80;
  for (int y = 0; y < 161; ++y)
    for (int x = 0; x < 161; ++x) {
      const double r = std::hypot(x - c, y - c), a = angle_deg(x, y, c);
      if (a >= 75 && a <= 105 && r > 35) f.at(x, y) = label::background;  // 100 um over 30 deg
    }
  const auto out = enforce_wall_thickness(f, cfg);
  for (int y = 0; y < 161; ++y)
    for (int x = 0; x < 161; ++x)
      if (out.at(x, y) != f.at(x, y)) {
        const double a = angle_deg(x, y, c);
        CHECK((a >= 50 && a <= 130));
      }
  for (double deg = 80; deg <= 100; deg += 1) CHECK(radial_tissue_run_um(out, deg) >= 500 - kPx * std::sqrt(2.0));
  // The distance-transform form of the thickness postcondition.
  const auto tissue_dist = [&](int x, int y) { return min_distance_to_label_um(out, x, y, label::background); };
  for (int deg = 0; deg < 360; deg += 15) {
    const double t = deg * std::numbers::pi / 180;
    const int x = static_cast<int>(std::lround(c + 31 * std::cos(t)));
    const int y = static_cast<int>(std::lround(c + 31 * std::sin(t)));
    if (out.at(x, y) == label::wall) CHECK(tissue_dist(x, y) >= 500 - kPx * std::sqrt(2.0));
  }
}

TEST_CASE("lipid cap: no lipid within 200 um of the lumen") {
  PreprocessConfig cfg;
  auto f = ring_frame(161, 30, 60, label::lipid);
  const auto out = enforce_lipid_cap(f, cfg);
  for (int y = 0; y < 161; ++y)
    for (int x = 0; x < 161; ++x) {
      const double d = min_distance_to_label_um(f, x, y, label::lumen);
      if (f.at(x, y) != label::lipid) {
        CHECK(out.at(x, y) == f.at(x, y));
      } else if (d <= 200) {
        CHECK(out.at(x, y) == label::wall);
      } else {
        CHECK(out.at(x, y) == label::lipid);
      }
    }
  CHECK(enforce_lipid_cap(out, cfg) == out);
}

TEST_CASE("lipid cap: deep lipid is unchanged") {
  PreprocessConfig cfg;
  auto f = ring_frame(161, 30, 70);
  for (int y = 0; y < 161; ++y)
    for (int x = 0; x < 161; ++x) {
      const double r = std::hypot(x - 80, y - 80);
      if (r >= 45 && r <= 55) f.at(x, y) = label::lipid;  // 300 um deep
    }
  CHECK(enforce_lipid_cap(f, cfg) == f);
}

TEST_CASE("refinement layers: shells around a calcium sphere match brute-force dilation") {
  PreprocessConfig cfg;
  cfg.inner_refine_radius_um = 60;
  cfg.outer_refine_radius_um = 60;
  LabelVolume v({25, 25, 25}, {kPx, kPx, kPx}, label::wall);
  for (int z = 0; z < 25; ++z)
    for (int y = 0; y < 25; ++y)
      for (int x = 0; x < 25; ++x)
        if (std::hypot(x - 12, y - 12, z - 12) <= 3) v.at(x, y, z) = label::calcium;
  const auto out = build_refinement_layers(v, cfg);
  CHECK(out.count(label::calcium) == v.count(label::calcium));
  for (int z = 0; z < 25; ++z)
    for (int y = 0; y < 25; ++y)
      for (int x = 0; x < 25; ++x) {
        if (v.at(x, y, z) == label::calcium) continue;
        double d = 1e300;
        for (int k = 0; k < 25; ++k)
          for (int j = 0; j < 25; ++j)
            for (int i = 0; i < 25; ++i)
              if (v.at(i, j, k) == label::calcium) d = std::min(d, std::hypot(i - x, j - y, k - z) * kPx);
        const LabelCode expect = d <= 60 + 1e-9 ? label::inner_refine : d <= 120 + 1e-9 ? label::outer_refine : label::wall;
        CHECK(out.at(x, y, z) == expect);
      }
  CHECK(build_refinement_layers(out, cfg) == out);
}

TEST_CASE("refinement layers: without inclusions shells only follow the lumen") {
  PreprocessConfig cfg;
  const auto f = ring_frame(101, 20, 45);
  const auto out = build_refinement_layers(f, cfg);
  CHECK(out.count(label::inner_refine) > 0);
  CHECK(out.count(label::outer_refine) > 0);
  CHECK(out.count(label::lumen) == f.count(label::lumen));
  for (int y = 0; y < 101; ++y)
    for (int x = 0; x < 101; ++x) {
      const double d = min_distance_to_label_um(f, x, y, label::lumen);
      if (out.at(x, y) == label::inner_refine) CHECK(d <= 200);
      if (out.at(x, y) == label::outer_refine) CHECK((d > 200 && d <= 400));
    }
}

TEST_CASE("refinement layers: nearby calcifications share one inner layer") {
  PreprocessConfig cfg;
  LabelVolume f({80, 60, 1}, {kPx, kPx, kPx}, label::wall);
  // Two 200 um radius nodules, surfaces 100 um apart.
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x)
      if (std::hypot(x - 27.5, y - 30) <= 10 || std::hypot(x - 52.5, y - 30) <= 10) f.at(x, y) = label::calcium;
  const auto out = build_refinement_layers(f, cfg);
  CHECK(connected_components(out, label::inner_refine, Connectivity::planar8).count() == 1);
  CHECK(out.at(40, 30) == label::inner_refine);
}

TEST_CASE("preprocess frame: pipeline order and invariants") {
  PreprocessConfig cfg;
  auto raw = ring_frame(161, 30, 45, raw_label::fibrous, false);
  raw.palette = raw_segmentation_palette();
  for (int y = 0; y < 161; ++y)
    for (int x = 0; x < 161; ++x) {
      const double r = std::hypot(x - 80, y - 80);
      if (r > 30 && r <= 38 && x > 80) raw.at(x, y) = raw_label::lipid;
      if (r > 38 && r <= 45 && y > 100) raw.at(x, y) = raw_label::mixed;
    }
  raw.at(80 + 40, 80) = raw_label::calcium;
  const auto out = preprocess_frame(raw, cfg);
  CHECK(out.count(label::calcium) == 1);
  CHECK(out.count(label::lumen) > 0);
  CHECK(connected_components(out, label::lumen, Connectivity::planar8).count() == 1);
  for (int y = 0; y < 161; ++y)
    for (int x = 0; x < 161; ++x)
      if (out.at(x, y) == label::lipid) CHECK(min_distance_to_label_um(out, x, y, label::lumen) > 200);
  CHECK(filter_small_components(out, cfg) == out);
  CHECK(enforce_lipid_cap(out, cfg) == out);
  CHECK(enforce_wall_thickness(out, cfg) == out);
}

TEST_CASE("preprocess stack: slices are processed independently") {
  PreprocessConfig cfg;
  LabelVolume stack({101, 101, 2}, {kPx, kPx, 400});
  stack.palette = raw_segmentation_palette();
  const auto a = ring_frame(101, 15, 30, raw_label::fibrous, false);
  const auto b = ring_frame(101, 20, 40, raw_label::fibrous, false);
  stack.set_frame(0, a);
  stack.set_frame(1, b);
  const auto out = preprocess_stack(stack, cfg);
  const auto same = [](const LabelVolume& x, const LabelVolume& y) {
    return std::ranges::equal(x.voxels(), y.voxels());
  };
  CHECK(same(out.frame(0), preprocess_frame(a, cfg)));
  CHECK(same(out.frame(1), preprocess_frame(b, cfg)));
}
