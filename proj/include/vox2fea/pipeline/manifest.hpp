#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vox2fea::pipeline {

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

struct ArtifactRecord {
  std::string path;  // relative to the output directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct StageRecord {
  std::string stage;
  std::string key;  // hash of the stage inputs and config section
  std::vector<ArtifactRecord> artifacts;
};

/// Content hashes of every file a run wrote. No timestamps or absolute
/// paths, so identical runs give identical manifests.
struct Manifest {
  std::string config_sha256;
  std::vector<StageRecord> stages;

  const StageRecord* find(const std::string& stage) const;
  std::string to_json() const;
  static Manifest from_json(const std::string& text);
  /// Empty when the file is missing or unreadable.
  static std::optional<Manifest> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Record for `file` (inside `root`).
ArtifactRecord make_record(const std::filesystem::path& root, const std::filesystem::path& file);

/// True when every artifact exists under `root` with the recorded hash.
bool artifacts_intact(const std::filesystem::path& root, const StageRecord& stage);

}  // namespace vox2fea::pipeline
