#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vox2fea/core/label_volume.hpp"

namespace vox2fea::pipeline {

enum class PhantomKind { annulus, eccentric_lipid, calcified_nodule, convergence_region };

PhantomKind parse_phantom_kind(const std::string& name);
std::string phantom_kind_name(PhantomKind kind);

/// Geometry of a synthetic pullback. Radii are linear in frame index from
/// the first to the second value. Frames use the raw segmentation palette
/// (fibrous, mixed, lipid, calcium, background; the lumen is background).
struct PhantomParams {
  double pixel_um = 20.0;
  double frame_spacing_um = 400.0;
  int frames = 3;
  /// Frame side in pixels; 0 picks the outer diameter plus a margin.
  int width_px = 0;
  double lumen_radius_um[2] = {600.0, 600.0};
  double outer_radius_um[2] = {1100.0, 1100.0};
  /// Wall sector (centred on +y) rendered as mixed tissue, degrees.
  double mixed_arc_deg = 90.0;
  /// Lipid crescent: angular span, tissue between it and the lumen, radial size.
  double lipid_arc_deg[2] = {120.0, 120.0};
  double lipid_cap_um = 100.0;
  double lipid_thickness_um = 250.0;
  /// Calcium nodule radius; its centre sits one radius off the lumen.
  double calcium_radius_um = 150.0;
  /// Radius of a thin-wall sector (relative to outer radius) over this span.
  double thin_sector_deg = 0.0;
  double thin_sector_thickness_um = 100.0;
  /// Scatter 10-pixel lipid and calcium specks inside the wall.
  bool specks = false;
};

struct Phantom {
  LabelVolume frames;  // nz = frame count, raw palette
  nlohmann::json truth;
};

/// Deterministic phantom; throws InvalidArgument on infeasible geometry.
Phantom generate_phantom(PhantomKind kind, const PhantomParams& params);

/// Writes `<stem>.json`/`<stem>.raw` and `<stem>.truth.json`; returns the
/// written paths.
std::vector<std::filesystem::path> write_phantom(const Phantom& phantom, const std::filesystem::path& stem);

}  // namespace vox2fea::pipeline
