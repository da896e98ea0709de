#include "vox2fea/pipeline/phantom.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/core.h>

#include "vox2fea/core/labelmap_io.hpp"

namespace vox2fea::pipeline {

using nlohmann::json;

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "annulus") return PhantomKind::annulus;
  if (name == "eccentric-lipid") return PhantomKind::eccentric_lipid;
  if (name == "calcified-nodule") return PhantomKind::calcified_nodule;
  if (name == "convergence-region") return PhantomKind::convergence_region;
  throw InvalidArgument(fmt::format("unknown phantom kind '{}'", name));
}

std::string phantom_kind_name(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::annulus: return "annulus";
    case PhantomKind::eccentric_lipid: return "eccentric-lipid";
    case PhantomKind::calcified_nodule: return "calcified-nodule";
    case PhantomKind::convergence_region: return "convergence-region";
  }
  return "unknown";
}

namespace {

double lerp(const double (&v)[2], double t) { return v[0] + (v[1] - v[0]) * t; }

// Smallest signed difference between two angles, degrees.
double angle_gap(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d > 180) d -= 360;
  if (d < -180) d += 360;
  return d;
}

struct FrameShape {
  double lumen, outer, lipid_arc;
};

void validate(PhantomKind kind, const PhantomParams& p) {
  const auto fail = [&](const std::string& what) {
    return InvalidArgument(fmt::format("phantom {}: {}", phantom_kind_name(kind), what));
  };
  if (!(p.pixel_um > 0 && p.frame_spacing_um > 0)) throw fail("spacings must be positive");
  if (p.frames < 2) throw fail("need at least two frames");
  for (int i = 0; i < 2; ++i) {
    if (!(p.lumen_radius_um[i] > 2 * p.pixel_um)) throw fail("lumen radius must exceed two pixels");
    if (!(p.outer_radius_um[i] > p.lumen_radius_um[i] + p.pixel_um)) throw fail("outer radius must exceed lumen radius");
  }
  const bool lipid = kind == PhantomKind::eccentric_lipid || kind == PhantomKind::convergence_region;
  const bool calcium = kind == PhantomKind::calcified_nodule || kind == PhantomKind::convergence_region;
  const double min_wall = std::min(p.outer_radius_um[0] - p.lumen_radius_um[0], p.outer_radius_um[1] - p.lumen_radius_um[1]);
  if (lipid && !(p.lipid_cap_um >= 0 && p.lipid_thickness_um > 0 &&
                 p.lipid_cap_um + p.lipid_thickness_um < min_wall))
    throw fail("lipid crescent does not fit inside the wall");
  if (calcium && !(p.calcium_radius_um > 0 && 2 * p.calcium_radius_um < min_wall))
    throw fail("calcium nodule does not fit inside the wall");
}

}  // namespace

Phantom generate_phantom(PhantomKind kind, const PhantomParams& p) {
  validate(kind, p);
  const double max_outer = std::max(p.outer_radius_um[0], p.outer_radius_um[1]);
  // The margin keeps the exterior background larger than the lumen.
  const int width = p.width_px > 0 ? p.width_px
                                   : 2 * static_cast<int>(std::ceil(max_outer * 1.35 / p.pixel_um)) + 1;
  if (width * p.pixel_um / 2 <= max_outer + p.pixel_um) throw InvalidArgument("phantom frame too small for the vessel");

  const bool lipid = kind == PhantomKind::eccentric_lipid || kind == PhantomKind::convergence_region;
  const bool calcium = kind == PhantomKind::calcified_nodule || kind == PhantomKind::convergence_region;
  const double lipid_centre_deg = 270.0;
  const double calcium_deg = kind == PhantomKind::convergence_region ? 30.0 : 0.0;

  LabelVolume vol({width, width, p.frames}, {p.pixel_um, p.pixel_um, p.frame_spacing_um});
  vol.palette = raw_segmentation_palette();
  for (int z = 0; z < p.frames; ++z) vol.frame_positions.push_back(z);
  const double c = (width - 1) / 2.0;

  json frames = json::array();
  for (int z = 0; z < p.frames; ++z) {
    const double t = static_cast<double>(z) / (p.frames - 1);
    const FrameShape s{lerp(p.lumen_radius_um, t), lerp(p.outer_radius_um, t), lerp(p.lipid_arc_deg, t)};
    const double calc_r = s.lumen + p.calcium_radius_um;
    const double calc_x = calc_r * std::cos(calcium_deg * std::numbers::pi / 180);
    const double calc_y = calc_r * std::sin(calcium_deg * std::numbers::pi / 180);
    for (int y = 0; y < width; ++y)
      for (int x = 0; x < width; ++x) {
        const double ux = (x - c) * p.pixel_um, uy = (y - c) * p.pixel_um;
        const double r = std::hypot(ux, uy);
        double theta = std::atan2(uy, ux) * 180 / std::numbers::pi;
        if (theta < 0) theta += 360;
        LabelCode code = raw_label::background;
        double outer = s.outer;
        if (p.thin_sector_deg > 0 && std::abs(angle_gap(theta, 180.0)) <= p.thin_sector_deg / 2)
          outer = s.lumen + p.thin_sector_thickness_um;
        if (r > s.lumen && r <= outer) {
          code = std::abs(angle_gap(theta, 90.0)) <= p.mixed_arc_deg / 2 ? raw_label::mixed : raw_label::fibrous;
          if (lipid && std::abs(angle_gap(theta, lipid_centre_deg)) <= s.lipid_arc / 2 &&
              r > s.lumen + p.lipid_cap_um && r <= s.lumen + p.lipid_cap_um + p.lipid_thickness_um)
            code = raw_label::lipid;
        }
        if (calcium && std::hypot(ux - calc_x, uy - calc_y) <= p.calcium_radius_um) code = raw_label::calcium;
        vol.at(x, y, z) = code;
      }
    if (p.specks) {
      // 10-pixel plus-shaped blobs (a 3x3 square and one extra pixel) mid-wall.
      const double mid = (s.lumen + s.outer) / 2;
      const auto stamp = [&](double deg, LabelCode code) {
        const int cx = static_cast<int>(std::lround(c + mid * std::cos(deg * std::numbers::pi / 180) / p.pixel_um));
        const int cy = static_cast<int>(std::lround(c + mid * std::sin(deg * std::numbers::pi / 180) / p.pixel_um));
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) vol.at(cx + dx, cy + dy, z) = code;
        vol.at(cx + 2, cy, z) = code;
      };
      stamp(45.0, raw_label::lipid);
      stamp(135.0, raw_label::calcium);
    }

    json f;
    f["z_um"] = z * p.frame_spacing_um;
    f["lumen_radius_um"] = s.lumen;
    f["outer_radius_um"] = s.outer;
    if (lipid) f["lipid_arc_deg"] = s.lipid_arc;
    json counts = json::object(), centroids = json::object();
    for (const auto& [name, code] : vol.palette) {
      std::size_t n = 0;
      double sx = 0, sy = 0;
      for (int y = 0; y < width; ++y)
        for (int x = 0; x < width; ++x)
          if (vol.at(x, y, z) == code) {
            ++n;
            sx += x;
            sy += y;
          }
      counts[name] = n;
      if (n > 0) centroids[name] = {sx / n, sy / n};
    }
    f["counts"] = counts;
    f["centroids_px"] = centroids;
    frames.push_back(f);
  }

  json truth;
  truth["kind"] = phantom_kind_name(kind);
  truth["pixel_um"] = p.pixel_um;
  truth["frame_spacing_um"] = p.frame_spacing_um;
  truth["dims"] = {width, width, p.frames};
  truth["frame_centre_px"] = c;
  if (lipid) {
    truth["lipid_cap_um"] = p.lipid_cap_um;
    truth["lipid_thickness_um"] = p.lipid_thickness_um;
    truth["lipid_centre_deg"] = lipid_centre_deg;
  }
  if (calcium) {
    truth["calcium_radius_um"] = p.calcium_radius_um;
    truth["calcium_direction_deg"] = calcium_deg;
  }
  if (p.thin_sector_deg > 0) {
    truth["thin_sector_deg"] = p.thin_sector_deg;
    truth["thin_sector_thickness_um"] = p.thin_sector_thickness_um;
  }
  json totals = json::object();
  for (const auto& [name, code] : vol.palette) totals[name] = vol.count(code);
  truth["counts"] = totals;
  truth["frames"] = frames;
  return {std::move(vol), std::move(truth)};
}

std::vector<std::filesystem::path> write_phantom(const Phantom& phantom, const std::filesystem::path& stem) {
  const auto [meta, raw] = save_label_volume(phantom.frames, stem);
  const std::filesystem::path truth_path = stem.string() + ".truth.json";
  std::ofstream out(truth_path, std::ios::binary);
  out << phantom.truth.dump(2) << '\n';
  if (!out) throw Error(fmt::format("cannot write {}", truth_path.string()));
  return {meta, raw, truth_path};
}

}  // namespace vox2fea::pipeline
