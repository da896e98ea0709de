#include "vox2fea/interpolate/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "vox2fea/core/components.hpp"

namespace vox2fea::interpolate {

int InterpolationPlan::slices_between(std::size_t gap) const {
  const double span = frame_z_um[gap + 1] - frame_z_um[gap];
  return static_cast<int>(std::lround(span / target_spacing_um));
}

std::vector<int> InterpolationPlan::frame_slice_indices() const {
  std::vector<int> idx{0};
  for (std::size_t g = 0; g + 1 < frame_z_um.size(); ++g) idx.push_back(idx.back() + slices_between(g));
  return idx;
}

void InterpolationPlan::validate() const {
  if (frame_z_um.size() < 2) throw InvalidArgument("interpolation needs at least two frames");
  if (!(target_spacing_um > 0)) throw InvalidArgument("target spacing must be > 0");
  for (std::size_t g = 0; g + 1 < frame_z_um.size(); ++g) {
    if (!(frame_z_um[g + 1] > frame_z_um[g]))
      throw InvalidArgument("frame positions must be strictly increasing");
    if (slices_between(g) < 1)
      throw InvalidArgument(fmt::format("gap {} is narrower than the target spacing", g));
  }
}

InterpolationPlan InterpolationPlan::uniform(std::size_t frame_count, double gap_um,
                                             double target_spacing_um) {
  InterpolationPlan plan;
  plan.target_spacing_um = target_spacing_um;
  for (std::size_t i = 0; i < frame_count; ++i) plan.frame_z_um.push_back(gap_um * static_cast<double>(i));
  return plan;
}

namespace {

std::array<int, 2> rounded_centroid(const Vec3& c, const Dims& dims, Diagnostics* diag) {
  int x = static_cast<int>(std::lround(c.x()));
  int y = static_cast<int>(std::lround(c.y()));
  if (!dims.contains(x, y, 0)) {
    warn(diag, fmt::format("seed centroid ({}, {}) outside frame; clamped", x, y));
    x = std::clamp(x, 0, dims.nx - 1);
    y = std::clamp(y, 0, dims.ny - 1);
  }
  return {x, y};
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Best partner of every component of `from` among components of `to`:
// largest overlap, else nearest centroid. 0 when `to` is empty.
std::vector<std::uint32_t> best_partners(const ComponentMap& from, const ComponentMap& to,
                                         const std::vector<Vec3>& from_c, const std::vector<Vec3>& to_c,
                                         const Spacing& sp) {
  std::vector<std::uint32_t> out(from.count(), 0);
  if (to.count() == 0) return out;
  std::vector<std::vector<std::size_t>> overlap(from.count(), std::vector<std::size_t>(to.count(), 0));
  for (std::size_t i = 0; i < from.ids.size(); ++i)
    if (from.ids[i] && to.ids[i]) ++overlap[from.ids[i] - 1][to.ids[i] - 1];
  for (std::size_t a = 0; a < from.count(); ++a) {
    std::size_t best = 0;
    for (std::size_t b = 0; b < to.count(); ++b)
      if (overlap[a][b] > best) {
        best = overlap[a][b];
        out[a] = static_cast<std::uint32_t>(b + 1);
      }
    if (out[a] != 0) continue;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < to.count(); ++b) {
      const Vec3 diff = from_c[a] - to_c[b];
      const double d = std::hypot(diff.x() * sp.x, diff.y() * sp.y);
      if (d < best_d) {
        best_d = d;
        out[a] = static_cast<std::uint32_t>(b + 1);
      }
    }
  }
  return out;
}

}  // namespace

SeededPair seed_artificial_label(const LabelVolume& frame_a, const LabelVolume& frame_b, LabelCode code,
                                 Diagnostics* diag) {
  SeededPair out{frame_a, frame_b, {}, {}};
  const bool in_a = frame_a.contains(code);
  const bool in_b = frame_b.contains(code);
  if (in_a == in_b) return out;
  const LabelVolume& source = in_a ? frame_a : frame_b;
  LabelVolume& target = in_a ? out.frame_b : out.frame_a;
  auto& seeds = in_a ? out.seeds_in_b : out.seeds_in_a;
  const auto comps = connected_components(source, code, Connectivity::planar8);
  for (const Vec3& c : comps.centroids()) {
    const auto xy = rounded_centroid(c, source.dims(), diag);
    target.at(xy[0], xy[1]) = code;
    seeds.push_back(xy);
  }
  return out;
}

std::vector<ComponentGroup> match_components(const LabelVolume& frame_a, const LabelVolume& frame_b,
                                             LabelCode code, Diagnostics* diag) {
  const Dims& dims = frame_a.dims();
  const auto ca = connected_components(frame_a, code, Connectivity::planar8);
  const auto cb = connected_components(frame_b, code, Connectivity::planar8);
  const auto cen_a = ca.centroids();
  const auto cen_b = cb.centroids();
  const auto a_to_b = best_partners(ca, cb, cen_a, cen_b, frame_a.spacing());
  const auto b_to_a = best_partners(cb, ca, cen_b, cen_a, frame_a.spacing());

  const std::size_t na = ca.count(), nb = cb.count();
  UnionFind uf(na + nb);
  for (std::size_t a = 0; a < na; ++a)
    if (a_to_b[a]) uf.unite(a, na + a_to_b[a] - 1);
  for (std::size_t b = 0; b < nb; ++b)
    if (b_to_a[b]) uf.unite(na + b, b_to_a[b] - 1);

  std::vector<std::size_t> group_of_root(na + nb, static_cast<std::size_t>(-1));
  std::vector<ComponentGroup> groups;
  auto group_for = [&](std::size_t node) -> ComponentGroup& {
    const std::size_t r = uf.find(node);
    if (group_of_root[r] == static_cast<std::size_t>(-1)) {
      group_of_root[r] = groups.size();
      groups.push_back({code, std::vector<std::uint8_t>(dims.count(), 0),
                        std::vector<std::uint8_t>(dims.count(), 0)});
    }
    return groups[group_of_root[r]];
  };
  for (std::size_t node = 0; node < na + nb; ++node) group_for(node);
  for (std::size_t i = 0; i < dims.count(); ++i) {
    if (ca.ids[i]) group_for(ca.ids[i] - 1).mask_a[i] = 1;
    if (cb.ids[i]) group_for(na + cb.ids[i] - 1).mask_b[i] = 1;
  }
  // A one-sided group is a single unmatched component: seed the other side.
  for (std::size_t node = 0; node < na + nb; ++node) {
    auto& g = group_for(node);
    const bool a_empty = std::none_of(g.mask_a.begin(), g.mask_a.end(), [](auto v) { return v != 0; });
    const bool b_empty = std::none_of(g.mask_b.begin(), g.mask_b.end(), [](auto v) { return v != 0; });
    if (a_empty == b_empty) continue;
    const Vec3 c = node < na ? cen_a[node] : cen_b[node - na];
    const auto xy = rounded_centroid(c, dims, diag);
    (a_empty ? g.mask_a : g.mask_b)[dims.index(xy[0], xy[1], 0)] = 1;
  }
  return groups;
}

std::vector<std::uint8_t> interpolate_component_pair(const DistanceField& field_a,
                                                     const DistanceField& field_b, double t) {
  if (!(field_a.dims == field_b.dims) || !(field_a.spacing == field_b.spacing)) {
    throw InvalidArgument("interpolate_component_pair: fields differ in dims or spacing");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("interpolation fraction must lie in [0, 1]");
  std::vector<std::uint8_t> mask(field_a.values.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = (1.0 - t) * field_a.values[i] + t * field_b.values[i] <= 0.0 ? 1 : 0;
  return mask;
}

LabelVolume expand_labels(const MultiMaskSlice& slice, std::span<const std::uint8_t> region) {
  const std::size_t n = slice.dims.count();
  // Priority rank: lower wins ties; labels outside the list rank last.
  auto rank = [](LabelCode c) {
    const auto it = std::find(kPriority.begin(), kPriority.end(), c);
    return it == kPriority.end() ? static_cast<int>(kPriority.size()) + c
                                 : static_cast<int>(it - kPriority.begin());
  };
  std::vector<std::pair<LabelCode, const std::vector<std::uint8_t>*>> ordered;
  for (const auto& [code, mask] : slice.masks)
    if (std::any_of(mask.begin(), mask.end(), [](auto v) { return v != 0; }))
      ordered.emplace_back(code, &mask);
  if (ordered.empty()) throw InvalidArgument("expand_labels: all masks are empty");
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });

  LabelVolume out(slice.dims, slice.spacing);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (const auto& [code, mask] : ordered) {
    const auto d2 = squared_distance_transform(*mask, slice.dims, slice.spacing);
    for (std::size_t i = 0; i < n; ++i) {
      if (!region.empty() && !region[i]) continue;
      if (d2[i] < best[i]) {  // strict: earlier (higher priority) labels keep ties
        best[i] = d2[i];
        out[i] = code;
      }
    }
  }
  return out;
}

LabelVolume crop_to_mask(const LabelVolume& frame, std::span<const std::uint8_t> section_mask) {
  if (section_mask.size() != frame.size()) throw InvalidArgument("crop_to_mask: mask size mismatch");
  if (std::none_of(section_mask.begin(), section_mask.end(), [](auto v) { return v != 0; }))
    throw InvalidArgument("crop_to_mask: empty section mask");
  LabelVolume out = frame;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!section_mask[i]) out[i] = label::background;
  return out;
}

namespace {

std::vector<std::uint8_t> non_background(const LabelVolume& f) {
  std::vector<std::uint8_t> m(f.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = f[i] != label::background ? 1 : 0;
  return m;
}

struct GroupFields {
  LabelCode code;
  DistanceField a, b;
};

void interpolate_gap(const LabelVolume& fa, const LabelVolume& fb, int steps, LabelVolume& out,
                     int first_slice, Diagnostics* diag) {
  const Dims& dims = fa.dims();
  const Spacing& sp = fa.spacing();
  std::vector<GroupFields> fields;
  for (LabelCode code : kPriority) {
    for (auto& g : match_components(fa, fb, code, diag)) {
      fields.push_back({code, interface_signed_distance(g.mask_a, dims, sp),
                        interface_signed_distance(g.mask_b, dims, sp)});
    }
  }
  const auto sec_a = interface_signed_distance(non_background(fa), dims, sp);
  const auto sec_b = interface_signed_distance(non_background(fb), dims, sp);

  for (int k = 1; k < steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    MultiMaskSlice slice{dims, sp, {}};
    for (const auto& gf : fields) {
      auto m = interpolate_component_pair(gf.a, gf.b, t);
      auto& acc = slice.masks[gf.code];
      if (acc.empty()) acc.assign(dims.count(), 0);
      for (std::size_t i = 0; i < m.size(); ++i) acc[i] |= m[i];
    }
    const auto section = interpolate_component_pair(sec_a, sec_b, t);
    const auto expanded = expand_labels(slice, section);
    out.set_frame(first_slice + k, crop_to_mask(expanded, section));
  }
}

}  // namespace

LabelVolume interpolate_pullback(const std::vector<LabelVolume>& frames, const InterpolationPlan& plan,
                                 Diagnostics* diag) {
  plan.validate();
  if (frames.size() != plan.frame_z_um.size())
    throw InvalidArgument("frame count does not match the interpolation plan");
  const Dims fd = frames.front().dims();
  const Spacing fs = frames.front().spacing();
  for (const auto& f : frames) {
    if (f.dims().nz != 1 || f.dims().nx != fd.nx || f.dims().ny != fd.ny)
      throw InvalidArgument("all frames must be single slices of equal size");
  }
  if (std::abs(fs.x - plan.target_spacing_um) > 1e-9 * fs.x ||
      std::abs(fs.y - plan.target_spacing_um) > 1e-9 * fs.y) {
    throw InvalidArgument("target spacing must equal the in-plane spacing for an isotropic result");
  }
  const auto slice_idx = plan.frame_slice_indices();
  LabelVolume out({fd.nx, fd.ny, slice_idx.back() + 1},
                  {plan.target_spacing_um, plan.target_spacing_um, plan.target_spacing_um});
  out.frame_positions = slice_idx;
  for (std::size_t i = 0; i < frames.size(); ++i) out.set_frame(slice_idx[i], frames[i]);
  for (std::size_t g = 0; g + 1 < frames.size(); ++g) {
    try {
      interpolate_gap(frames[g], frames[g + 1], plan.slices_between(g), out, slice_idx[g], diag);
    } catch (const Error& e) {
      throw InvalidArgument(fmt::format("interpolating frames {} and {}: {}", g, g + 1, e.what()));
    }
  }
  return out;
}

LabelVolume interpolate_pullback(const LabelVolume& frame_stack, double target_spacing_um,
                                 Diagnostics* diag) {
  std::vector<LabelVolume> frames;
  for (int z = 0; z < frame_stack.dims().nz; ++z) frames.push_back(frame_stack.frame(z));
  const auto plan = InterpolationPlan::uniform(frames.size(), frame_stack.spacing().z, target_spacing_um);
  return interpolate_pullback(frames, plan, diag);
}

}  // namespace vox2fea::interpolate
