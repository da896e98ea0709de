#include "vox2fea/mesher/vtk_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>

namespace vox2fea::mesher {

namespace {
constexpr int kLinearTetType = 10;
constexpr int kQuadraticTetType = 24;
}  // namespace

void write_vtk(const TetMesh& mesh, const std::filesystem::path& path) {
  std::string out;
  auto it = std::back_inserter(out);
  fmt::format_to(it, "# vtk DataFile Version 3.0\nvox2fea tet mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
  fmt::format_to(it, "POINTS {} double\n", mesh.node_count());
  for (const auto& p : mesh.nodes) fmt::format_to(it, "{:.17g} {:.17g} {:.17g}\n", p.x(), p.y(), p.z());
  const int npe = mesh.nodes_per_element();
  fmt::format_to(it, "CELLS {} {}\n", mesh.element_count(), mesh.element_count() * (npe + 1));
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    fmt::format_to(it, "{}", npe);
    for (auto n : mesh.element(e)) fmt::format_to(it, " {}", n);
    out.push_back('\n');
  }
  fmt::format_to(it, "CELL_TYPES {}\n", mesh.element_count());
  const int type = mesh.order == ElementOrder::linear ? kLinearTetType : kQuadraticTetType;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) fmt::format_to(it, "{}\n", type);
  fmt::format_to(it, "CELL_DATA {}\nSCALARS label int 1\nLOOKUP_TABLE default\n", mesh.element_count());
  for (auto l : mesh.labels) fmt::format_to(it, "{}\n", static_cast<int>(l));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", path.string()));
  f << out;
  if (!f) throw Error(fmt::format("write failed: {}", path.string()));
}

TetMesh read_vtk(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError(fmt::format("cannot open {}", path.string()));
  const auto fail = [&](const std::string& what) {
    return FormatError(fmt::format("{}: {}", path.string(), what));
  };
  std::string line;
  for (int i = 0; i < 4 && std::getline(f, line); ++i) {
    if (i == 2 && line.rfind("ASCII", 0) != 0) throw fail("only ASCII files are supported");
    if (i == 3 && line.find("UNSTRUCTURED_GRID") == std::string::npos) throw fail("not an unstructured grid");
  }
  TetMesh mesh;
  std::string word;
  std::size_t cells = 0;
  std::vector<int> types;
  while (f >> word) {
    if (word == "POINTS") {
      std::size_t n;
      f >> n >> word;
      mesh.nodes.resize(n);
      for (auto& p : mesh.nodes) f >> p.x() >> p.y() >> p.z();
    } else if (word == "CELLS") {
      std::size_t total;
      f >> cells >> total;
      for (std::size_t c = 0; c < cells; ++c) {
        int npe;
        f >> npe;
        if (npe != 4 && npe != 10) throw fail(fmt::format("cell {} has {} nodes; only tets are supported", c, npe));
        if (c == 0) mesh.order = npe == 4 ? ElementOrder::linear : ElementOrder::quadratic;
        if (npe != mesh.nodes_per_element()) throw fail("mixed element orders");
        for (int k = 0; k < npe; ++k) {
          std::uint32_t n;
          f >> n;
          if (n >= mesh.nodes.size()) throw fail(fmt::format("cell {} references missing node {}", c, n));
          mesh.connectivity.push_back(n);
        }
      }
      mesh.labels.assign(cells, label::wall);
    } else if (word == "CELL_TYPES") {
      std::size_t n;
      f >> n;
      types.resize(n);
      for (auto& t : types) f >> t;
    } else if (word == "SCALARS") {
      std::string name;
      f >> name;
      std::getline(f, line);
      std::getline(f, line);  // LOOKUP_TABLE
      std::vector<int> values(cells);
      for (auto& v : values) f >> v;
      if (name == "label")
        for (std::size_t c = 0; c < cells; ++c) mesh.labels[c] = static_cast<LabelCode>(values[c]);
    } else if (word == "CELL_DATA") {
      std::size_t n;
      f >> n;
      if (n != cells) throw fail("CELL_DATA count does not match CELLS");
    }
    if (f.fail()) throw fail(fmt::format("ill-formed section {}", word));
  }
  for (int t : types)
    if (t != kLinearTetType && t != kQuadraticTetType) throw fail(fmt::format("unsupported cell type {}", t));
  return mesh;
}

}  // namespace vox2fea::mesher
