#include "vox2fea/core/components.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace vox2fea {

namespace {
struct Offset {
  int dx, dy, dz;
};

std::vector<Offset> neighbour_offsets(Connectivity c) {
  std::vector<Offset> out;
  const int zr = c == Connectivity::volumetric26 ? 1 : 0;
  for (int dz = -zr; dz <= zr; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx != 0 || dy != 0 || dz != 0) out.push_back({dx, dy, dz});
  return out;
}
}  // namespace

Connectivity default_connectivity(const Dims& dims) {
  return dims.nz == 1 ? Connectivity::planar8 : Connectivity::volumetric26;
}

std::vector<std::uint32_t> ComponentMap::by_size_descending() const {
  std::vector<std::uint32_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 1u);
  std::stable_sort(order.begin(), order.end(),
                   [this](std::uint32_t a, std::uint32_t b) { return sizes[a - 1] > sizes[b - 1]; });
  return order;
}

std::vector<Vec3> ComponentMap::centroids() const {
  std::vector<Vec3> sum(sizes.size(), Vec3::Zero());
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const std::uint32_t id = ids[dims.index(x, y, z)];
        if (id != 0) sum[id - 1] += Vec3(x, y, z);
      }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= static_cast<double>(sizes[i]);
  return sum;
}

ComponentMap connected_components(std::span<const std::uint8_t> mask, const Dims& dims,
                                  Connectivity connectivity) {
  ComponentMap map;
  map.dims = dims;
  map.ids.assign(dims.count(), 0);
  const auto offsets = neighbour_offsets(connectivity);
  std::vector<std::size_t> stack;

  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const std::size_t seed = dims.index(x, y, z);
        if (!mask[seed] || map.ids[seed] != 0) continue;
        const auto id = static_cast<std::uint32_t>(map.sizes.size() + 1);
        std::size_t size = 0;
        map.ids[seed] = id;
        stack.push_back(seed);
        while (!stack.empty()) {
          const std::size_t cur = stack.back();
          stack.pop_back();
          ++size;
          const int cx = static_cast<int>(cur % dims.nx);
          const int cy = static_cast<int>((cur / dims.nx) % dims.ny);
          const int cz = static_cast<int>(cur / dims.slice_count());
          for (const auto& o : offsets) {
            const int nx = cx + o.dx, ny = cy + o.dy, nz = cz + o.dz;
            if (!dims.contains(nx, ny, nz)) continue;
            const std::size_t n = dims.index(nx, ny, nz);
            if (mask[n] && map.ids[n] == 0) {
              map.ids[n] = id;
              stack.push_back(n);
            }
          }
        }
        map.sizes.push_back(size);
      }
  return map;
}

ComponentMap connected_components(const LabelVolume& vol, LabelCode code,
                                  Connectivity connectivity) {
  const auto m = mask_of(vol, code);
  return connected_components(m, vol.dims(), connectivity);
}

}  // namespace vox2fea
