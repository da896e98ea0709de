#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "vox2fea/mesher/structured.hpp"

namespace testing {

using namespace vox2fea;

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vox2fea_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

LabelVolume disk_frame(int n, double radius_px, LabelCode code, double pixel_um, LabelCode fill) {
  LabelVolume f({n, n, 1}, {pixel_um, pixel_um, pixel_um}, fill);
  const double c = (n - 1) / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (std::hypot(x - c, y - c) <= radius_px) f.at(x, y) = code;
  return f;
}

TetMesh tiny_vessel() {
  TetMesh m = mesher::structured_box(6, 6, 2, 20.0);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const Vec3 c = tet_centroid(m, e) / 20.0;
    const int cx = static_cast<int>(c.x()), cy = static_cast<int>(c.y());
    if (cx >= 2 && cx <= 3 && cy >= 2 && cy <= 3) m.labels[e] = label::lumen;
    else if (cx == 0 && cy == 0) m.labels[e] = label::lipid;
    else if (cx == 5 && cy == 5) m.labels[e] = label::calcium;
    else m.labels[e] = label::wall;
  }
  return m;
}

TetMesh small_vessel() {
  TetMesh m = mesher::structured_box(3, 3, 1, 20.0);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const Vec3 c = tet_centroid(m, e) / 20.0;
    const int cx = static_cast<int>(c.x()), cy = static_cast<int>(c.y());
    if (cx == 1 && cy == 1) m.labels[e] = label::lumen;
    else if (cx == 0 && cy == 0) m.labels[e] = label::lipid;
    else if (cx == 2 && cy == 2) m.labels[e] = label::calcium;
  }
  return m;
}

TetMesh random_mesh(std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(1, 4);
  const int nx = dim(rng), ny = dim(rng), nz = dim(rng);
  TetMesh box = mesher::structured_box(nx, ny, nz, 10.0);
  std::uniform_real_distribution<double> jitter(-1.2, 1.2);
  for (auto& p : box.nodes) {
    const bool interior = p.x() > 0 && p.y() > 0 && p.z() > 0 && p.x() < nx * 10.0 - 1e-9 &&
                          p.y() < ny * 10.0 - 1e-9 && p.z() < nz * 10.0 - 1e-9;
    if (interior) p += Vec3(jitter(rng), jitter(rng), jitter(rng));
  }
  TetMesh out;
  out.nodes = box.nodes;
  std::bernoulli_distribution keep(0.8);
  for (std::size_t e = 0; e < box.element_count(); ++e)
    if (keep(rng) || out.element_count() == 0) {
      const auto c = box.corners(e);
      out.connectivity.insert(out.connectivity.end(), c.begin(), c.end());
      out.labels.push_back(label::wall);
    }
  return out;
}

std::vector<std::size_t> brute_component_sizes(const std::vector<std::uint8_t>& mask, const Dims& dims) {
  std::vector<int> seen(mask.size(), 0);
  std::vector<std::size_t> sizes;
  const int dz = dims.nz == 1 ? 0 : 1;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const auto i = dims.index(x, y, z);
        if (!mask[i] || seen[i]) continue;
        std::size_t n = 0;
        std::vector<std::array<int, 3>> stack{{x, y, z}};
        seen[i] = 1;
        while (!stack.empty()) {
          const auto [a, b, c] = stack.back();
          stack.pop_back();
          ++n;
          for (int k = -dz; k <= dz; ++k)
            for (int j = -1; j <= 1; ++j)
              for (int l = -1; l <= 1; ++l) {
                const int p = a + l, q = b + j, r = c + k;
                if (!dims.contains(p, q, r)) continue;
                const auto ii = dims.index(p, q, r);
                if (mask[ii] && !seen[ii]) {
                  seen[ii] = 1;
                  stack.push_back({p, q, r});
                }
              }
        }
        sizes.push_back(n);
      }
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

}  // namespace testing
