#include "vox2fea/preprocess/preprocess.hpp"

#include <array>

#include <fmt/core.h>

#include "vox2fea/core/components.hpp"
#include "vox2fea/core/distance.hpp"

namespace vox2fea::preprocess {

void PreprocessConfig::validate() const {
  for (double v : {min_component_area_px, min_wall_thickness_um, lipid_cap_thickness_um,
                   inner_refine_radius_um, outer_refine_radius_um}) {
    if (!(v > 0)) throw InvalidArgument("preprocess parameters must all be > 0");
  }
}

namespace {
void require_frame(const LabelVolume& frame, const char* op) {
  if (frame.dims().nz != 1) throw InvalidArgument(fmt::format("{} expects a single frame", op));
}

LabelVolume relabelled_copy(const LabelVolume& in) {
  LabelVolume out = in;
  out.palette = standard_palette();
  return out;
}
}  // namespace

LabelVolume pool_labels(const LabelVolume& frame) {
  LabelVolume out = relabelled_copy(frame);
  for (auto& v : out.voxels()) {
    switch (v) {
      case raw_label::background: v = label::background; break;
      case raw_label::fibrous:
      case raw_label::mixed: v = label::wall; break;
      case raw_label::lipid: v = label::lipid; break;
      case raw_label::calcium: v = label::calcium; break;
      default: throw InvalidArgument(fmt::format("pool_labels: unknown segmentation code {}", v));
    }
  }
  return out;
}

LabelVolume isolate_lumen(const LabelVolume& frame, Diagnostics* diag) {
  require_frame(frame, "isolate_lumen");
  if (frame.contains(label::lumen)) return frame;
  const auto comps = connected_components(frame, label::background, Connectivity::planar8);
  if (comps.count() < 2) {
    throw InvalidArgument("isolate_lumen: fewer than two background components, no enclosed lumen");
  }
  const auto order = comps.by_size_descending();
  const std::uint32_t lumen_id = order[1];
  for (std::size_t k = 2; k < order.size(); ++k) {
    warn(diag, fmt::format("isolate_lumen: enclosed cavity of {} px left as background",
                           comps.size_of(order[k])));
  }
  LabelVolume out = relabelled_copy(frame);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (comps.ids[i] == lumen_id) out[i] = label::lumen;
  return out;
}

LabelVolume filter_small_components(const LabelVolume& frame, const PreprocessConfig& cfg) {
  require_frame(frame, "filter_small_components");
  LabelVolume out = frame;
  const Dims& d = out.dims();
  constexpr int kMaxPasses = 64;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool changed = false;
    for (LabelCode code : {label::wall, label::lipid}) {
      const auto comps = connected_components(out, code, Connectivity::planar8);
      std::vector<std::vector<std::size_t>> members(comps.count());
      for (std::size_t i = 0; i < comps.ids.size(); ++i)
        if (comps.ids[i] != 0) members[comps.ids[i] - 1].push_back(i);
      std::vector<std::uint32_t> stamp(out.size(), 0);
      for (std::uint32_t id = 1; id <= comps.count(); ++id) {
        if (static_cast<double>(comps.size_of(id)) >= cfg.min_component_area_px) continue;
        // Majority label among voxels 8-adjacent to the component, counted
        // once per neighbouring voxel.
        std::array<std::size_t, 256> votes{};
        for (std::size_t m : members[id - 1]) {
          const int x = static_cast<int>(m % d.nx), y = static_cast<int>(m / d.nx);
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = x + dx, ny = y + dy;
              if (!d.contains(nx, ny, 0)) continue;
              const std::size_t n = d.index(nx, ny, 0);
              if (comps.ids[n] == id || stamp[n] == id) continue;
              stamp[n] = id;
              ++votes[out[n]];
            }
        }
        std::size_t best = 0;
        LabelCode winner = code;
        for (int c = 0; c < 256; ++c) {
          if (c != code && votes[c] > best) {
            best = votes[c];
            winner = static_cast<LabelCode>(c);
          }
        }
        if (winner == code) continue;  // no foreign neighbours
        for (std::size_t m : members[id - 1]) out[m] = winner;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

namespace {
std::vector<double> distance_to_label(const LabelVolume& vol, LabelCode code) {
  const auto m = mask_of(vol, code);
  return distance_transform(m, vol.dims(), vol.spacing());
}
}  // namespace

LabelVolume enforce_wall_thickness(const LabelVolume& frame, const PreprocessConfig& cfg) {
  require_frame(frame, "enforce_wall_thickness");
  if (!frame.contains(label::lumen)) return frame;
  const auto dist = distance_to_label(frame, label::lumen);
  LabelVolume out = frame;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] == label::background && dist[i] <= cfg.min_wall_thickness_um) out[i] = label::wall;
  return out;
}

LabelVolume enforce_lipid_cap(const LabelVolume& frame, const PreprocessConfig& cfg) {
  require_frame(frame, "enforce_lipid_cap");
  if (!frame.contains(label::lumen)) return frame;
  const auto dist = distance_to_label(frame, label::lumen);
  LabelVolume out = frame;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] == label::lipid && dist[i] <= cfg.lipid_cap_thickness_um) out[i] = label::wall;
  return out;
}

LabelVolume build_refinement_layers(const LabelVolume& vol, const PreprocessConfig& cfg) {
  std::vector<std::uint8_t> sources(vol.size());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const LabelCode c = vol[i];
    sources[i] = (c == label::calcium || c == label::lipid || c == label::lumen) ? 1 : 0;
  }
  const auto dist = distance_transform(sources, vol.dims(), vol.spacing());
  const double inner = cfg.inner_refine_radius_um;
  const double outer = cfg.inner_refine_radius_um + cfg.outer_refine_radius_um;
  LabelVolume out = vol;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != label::wall) continue;
    if (dist[i] <= inner) {
      out[i] = label::inner_refine;
    } else if (dist[i] <= outer) {
      out[i] = label::outer_refine;
    }
  }
  return out;
}

LabelVolume preprocess_frame(const LabelVolume& raw_frame, const PreprocessConfig& cfg,
                             Diagnostics* diag) {
  cfg.validate();
  LabelVolume f = pool_labels(raw_frame);
  f = isolate_lumen(f, diag);
  f = filter_small_components(f, cfg);
  f = enforce_lipid_cap(f, cfg);
  f = enforce_wall_thickness(f, cfg);
  return f;
}

LabelVolume preprocess_stack(const LabelVolume& raw_stack, const PreprocessConfig& cfg,
                             Diagnostics* diag) {
  LabelVolume out(raw_stack.dims(), raw_stack.spacing());
  out.frame_positions = raw_stack.frame_positions;
  for (int z = 0; z < raw_stack.dims().nz; ++z) {
    Diagnostics local;
    try {
      out.set_frame(z, preprocess_frame(raw_stack.frame(z), cfg, &local));
    } catch (const Error& e) {
      throw InvalidArgument(fmt::format("frame {}: {}", z, e.what()));
    }
    for (auto& w : local.warnings) warn(diag, fmt::format("frame {}: {}", z, w));
  }
  return out;
}

}  // namespace vox2fea::preprocess
