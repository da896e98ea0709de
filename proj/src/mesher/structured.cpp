#include "vox2fea/mesher/structured.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vox2fea::mesher {

namespace {

// The six tets of a cube walk from corner 0 to corner 7 one axis at a time.
// Corner bits: 1 = +x, 2 = +y, 4 = +z.
void split_cube(TetMesh& mesh, const std::array<std::uint32_t, 8>& corner, LabelCode code) {
  std::array<int, 3> axes{0, 1, 2};
  do {
    const int c1 = 1 << axes[0];
    const int c2 = c1 | (1 << axes[1]);
    std::array<std::uint32_t, 4> t{corner[0], corner[c1], corner[c2], corner[7]};
    const auto p = std::array<Vec3, 4>{mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]};
    if (signed_volume(p[0], p[1], p[2], p[3]) < 0) std::swap(t[1], t[2]);
    mesh.add_tet(t, code);
  } while (std::next_permutation(axes.begin(), axes.end()));
}

}  // namespace

TetMesh structured_box(int nx, int ny, int nz, double cell_um, const Vec3& origin_um, LabelCode code) {
  if (nx < 1 || ny < 1 || nz < 1 || !(cell_um > 0)) throw InvalidArgument("structured_box: bad dimensions");
  TetMesh mesh;
  const auto id = [&](int i, int j, int k) {
    return static_cast<std::uint32_t>(i + (nx + 1) * (j + (ny + 1) * k));
  };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) mesh.add_node(origin_um + cell_um * Vec3(i, j, k));
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        std::array<std::uint32_t, 8> c{};
        for (int b = 0; b < 8; ++b) c[b] = id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        split_cube(mesh, c, code);
      }
  return mesh;
}

TetMesh structured_annulus(double inner_um, double outer_um, double length_um, int nr, int ntheta, int nz,
                           LabelCode code) {
  if (!(inner_um > 0 && outer_um > inner_um && length_um > 0) || nr < 1 || ntheta < 3 || nz < 1)
    throw InvalidArgument("structured_annulus: bad dimensions");
  TetMesh mesh;
  const auto id = [&](int i, int j, int k) {
    return static_cast<std::uint32_t>(i + (nr + 1) * ((j % ntheta) + ntheta * k));
  };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j < ntheta; ++j)
      for (int i = 0; i <= nr; ++i) {
        const double r = inner_um + (outer_um - inner_um) * i / nr;
        const double th = 2 * std::numbers::pi * j / ntheta;
        mesh.add_node({r * std::cos(th), r * std::sin(th), length_um * k / nz});
      }
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ntheta; ++j)
      for (int i = 0; i < nr; ++i) {
        std::array<std::uint32_t, 8> c{};
        for (int b = 0; b < 8; ++b) c[b] = id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        split_cube(mesh, c, code);
      }
  return mesh;
}

}  // namespace vox2fea::mesher
