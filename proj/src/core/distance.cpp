#include "vox2fea/core/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vox2fea {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas w*(q-p)^2 + g[p] over the finite entries of g.
// `g` and `out` are strided views of length n.
void envelope_1d(const double* g, double* out, std::ptrdiff_t stride, int n, double w,
                 std::vector<int>& v, std::vector<double>& z, std::vector<double>& tmp) {
  tmp.resize(n);
  for (int i = 0; i < n; ++i) tmp[i] = g[i * stride];
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(tmp[q])) continue;
    const double fq = tmp[q] + w * q * q;
    double s = -kInf;
    while (k >= 0) {
      const int p = v[k];
      s = (fq - (tmp[p] + w * p * p)) / (2.0 * w * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q * stride] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q * stride] = w * d * d + tmp[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> sites,
                                               const Dims& dims, const Spacing& spacing) {
  std::vector<double> f(dims.count());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = sites[i] ? 0.0 : kInf;

  std::vector<int> v;
  std::vector<double> z, tmp;
  const std::ptrdiff_t sx = 1, sy = dims.nx, sz = static_cast<std::ptrdiff_t>(dims.slice_count());

  if (dims.nx > 1)
    for (int zz = 0; zz < dims.nz; ++zz)
      for (int y = 0; y < dims.ny; ++y) {
        double* row = f.data() + dims.index(0, y, zz);
        envelope_1d(row, row, sx, dims.nx, spacing.x * spacing.x, v, z, tmp);
      }
  if (dims.ny > 1)
    for (int zz = 0; zz < dims.nz; ++zz)
      for (int x = 0; x < dims.nx; ++x) {
        double* col = f.data() + dims.index(x, 0, zz);
        envelope_1d(col, col, sy, dims.ny, spacing.y * spacing.y, v, z, tmp);
      }
  if (dims.nz > 1)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        double* pillar = f.data() + dims.index(x, y, 0);
        envelope_1d(pillar, pillar, sz, dims.nz, spacing.z * spacing.z, v, z, tmp);
      }
  return f;
}

std::vector<double> distance_transform(std::span<const std::uint8_t> sites, const Dims& dims,
                                       const Spacing& spacing) {
  auto d = squared_distance_transform(sites, dims, spacing);
  for (double& x : d) x = std::sqrt(x);
  return d;
}

std::vector<std::uint8_t> boundary_voxels(std::span<const std::uint8_t> mask, const Dims& dims) {
  std::vector<std::uint8_t> b(dims.count(), 0);
  const bool planar = dims.nz == 1;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const std::size_t i = dims.index(x, y, z);
        if (!mask[i]) continue;
        auto outside = [&](int xx, int yy, int zz) {
          return !dims.contains(xx, yy, zz) || !mask[dims.index(xx, yy, zz)];
        };
        bool edge = outside(x - 1, y, z) || outside(x + 1, y, z) || outside(x, y - 1, z) ||
                    outside(x, y + 1, z);
        if (!planar) edge = edge || outside(x, y, z - 1) || outside(x, y, z + 1);
        b[i] = edge ? 1 : 0;
      }
  return b;
}

DistanceField signed_distance(std::span<const std::uint8_t> mask, const Dims& dims,
                              const Spacing& spacing) {
  DistanceField field;
  field.dims = dims;
  field.spacing = spacing;
  const auto boundary = boundary_voxels(mask, dims);
  bool any = false;
  for (auto b : boundary) any = any || b;
  if (!any) {
    field.values.assign(dims.count(), field.sentinel);
    field.empty_source = true;
    return field;
  }
  // The nearest member of the set seen from outside is always a boundary
  // voxel, so one transform serves both signs.
  field.values = distance_transform(boundary, dims, spacing);
  for (std::size_t i = 0; i < field.values.size(); ++i)
    if (mask[i]) field.values[i] = -field.values[i];
  return field;
}

DistanceField interface_signed_distance(std::span<const std::uint8_t> mask, const Dims& dims,
                                        const Spacing& spacing) {
  DistanceField field;
  field.dims = dims;
  field.spacing = spacing;
  std::vector<std::uint8_t> outside(mask.size());
  bool any_in = false, any_out = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    outside[i] = mask[i] ? 0 : 1;
    any_in = any_in || mask[i];
    any_out = any_out || outside[i];
  }
  if (!any_in) {
    field.values.assign(dims.count(), field.sentinel);
    field.empty_source = true;
    return field;
  }
  const double half = 0.5 * (dims.nz == 1 ? std::min(spacing.x, spacing.y)
                                          : std::min({spacing.x, spacing.y, spacing.z}));
  const auto to_in = distance_transform(mask, dims, spacing);
  const auto to_out = any_out ? distance_transform(outside, dims, spacing)
                              : std::vector<double>(mask.size(), field.sentinel + half);
  field.values.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    field.values[i] = mask[i] ? -(to_out[i] - half) : to_in[i] - half;
  return field;
}

DistanceField signed_distance(const LabelVolume& frame, LabelCode code) {
  if (frame.dims().nz != 1) throw InvalidArgument("signed_distance expects a single frame");
  const auto m = mask_of(frame, code);
  return signed_distance(m, frame.dims(), frame.spacing());
}

}  // namespace vox2fea
