#include "vox2fea/core/labelmap_io.hpp"

#include <fstream>
#include <iterator>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace vox2fea {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path labelmap_stem(const fs::path& path) {
  if (path.extension() == ".json" || path.extension() == ".raw") {
    fs::path stem = path;
    stem.replace_extension();
    return stem;
  }
  return path;
}

namespace {
fs::path with_suffix(const fs::path& stem, const char* suffix) {
  return fs::path(stem.string() + suffix);
}
}  // namespace

LabelVolume load_label_volume(const fs::path& path) {
  const fs::path stem = labelmap_stem(path);
  const fs::path meta_path = with_suffix(stem, ".json");
  const fs::path raw_path = with_suffix(stem, ".raw");

  std::ifstream meta_in(meta_path);
  if (!meta_in) throw FormatError(fmt::format("cannot open labelmap metadata {}", meta_path.string()));
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: ill-formed JSON: {}", meta_path.string(), e.what()));
  }

  Dims dims;
  Spacing spacing;
  Palette palette;
  std::vector<int> frames;
  try {
    const auto& d = meta.at("dims");
    const auto& s = meta.at("spacing_um");
    if (d.size() != 3 || s.size() != 3) throw FormatError("dims and spacing_um need 3 entries");
    dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
    spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    if (meta.contains("frame_positions")) frames = meta["frame_positions"].get<std::vector<int>>();
    if (meta.contains("palette")) {
      for (const auto& [name, code] : meta["palette"].items()) {
        const int c = code.get<int>();
        if (c < 0 || c > 255) throw FormatError(fmt::format("palette code {} out of byte range", c));
        palette[name] = static_cast<LabelCode>(c);
      }
    } else {
      palette = standard_palette();
    }
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: missing or mistyped field: {}", meta_path.string(), e.what()));
  }
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) throw FormatError("dims must be >= 1");
  if (!(spacing.x > 0 && spacing.y > 0 && spacing.z > 0)) throw FormatError("spacing must be > 0");

  std::ifstream raw_in(raw_path, std::ios::binary);
  if (!raw_in) throw FormatError(fmt::format("cannot open voxel file {}", raw_path.string()));
  std::vector<LabelCode> voxels((std::istreambuf_iterator<char>(raw_in)),
                                std::istreambuf_iterator<char>());
  if (voxels.size() != dims.count()) {
    throw FormatError(fmt::format("{}: holds {} bytes but dims {}x{}x{} need {}", raw_path.string(),
                                  voxels.size(), dims.nx, dims.ny, dims.nz, dims.count()));
  }
  std::array<bool, 256> allowed{};
  for (const auto& [name, code] : palette) allowed[code] = true;
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    if (!allowed[voxels[i]]) {
      throw FormatError(fmt::format("{}: voxel {} holds code {} outside the palette",
                                    raw_path.string(), i, voxels[i]));
    }
  }
  for (int z : frames) {
    if (z < 0 || z >= dims.nz) throw FormatError(fmt::format("frame position {} out of range", z));
  }

  LabelVolume vol(dims, spacing, std::move(voxels));
  vol.frame_positions = std::move(frames);
  vol.palette = std::move(palette);
  return vol;
}

std::pair<fs::path, fs::path> save_label_volume(const LabelVolume& vol, const fs::path& path) {
  const fs::path stem = labelmap_stem(path);
  const fs::path meta_path = with_suffix(stem, ".json");
  const fs::path raw_path = with_suffix(stem, ".raw");

  json meta;
  meta["dims"] = {vol.dims().nx, vol.dims().ny, vol.dims().nz};
  meta["spacing_um"] = {vol.spacing().x, vol.spacing().y, vol.spacing().z};
  meta["frame_positions"] = vol.frame_positions;
  json palette = json::object();
  for (const auto& [name, code] : vol.palette) palette[name] = code;
  meta["palette"] = palette;

  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  {
    std::ofstream out(meta_path);
    if (!out) throw FormatError(fmt::format("cannot write {}", meta_path.string()));
    out << meta.dump(2) << '\n';
  }
  {
    std::ofstream out(raw_path, std::ios::binary);
    if (!out) throw FormatError(fmt::format("cannot write {}", raw_path.string()));
    const auto v = vol.voxels();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
    if (!out) throw FormatError(fmt::format("short write to {}", raw_path.string()));
  }
  return {meta_path, raw_path};
}

}  // namespace vox2fea
