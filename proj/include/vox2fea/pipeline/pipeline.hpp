#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vox2fea/mesher/quality.hpp"
#include "vox2fea/microfe/convergence.hpp"
#include "vox2fea/pipeline/config.hpp"
#include "vox2fea/pipeline/manifest.hpp"

namespace vox2fea::pipeline {

/// A stage threw. `trail` lists the artifacts written before the failure.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause, std::vector<std::string> trail);
  const std::string& stage() const { return stage_; }
  const std::vector<std::string>& trail() const { return trail_; }

 private:
  std::string stage_;
  std::vector<std::string> trail_;
};

/// The final mesh failed the conformity or inversion check.
class ValidationFailure : public Error {
 public:
  explicit ValidationFailure(const std::string& what) : Error(what) {}
};

struct RunResult {
  Manifest manifest;
  mesher::QualityReport quality;
  std::vector<std::string> executed_stages;
  std::vector<std::string> cached_stages;
  std::vector<std::string> warnings;
  std::filesystem::path inp_path;
};

/// preprocess -> interpolate -> layers -> mesh -> optimize -> export
/// (-> verify). Every artifact goes to cfg.output_dir and into
/// manifest.json; a stage whose key and artifacts match the previous
/// manifest is loaded instead of recomputed.
RunResult run_pipeline(const PipelineConfig& cfg);

struct ConvergenceRun {
  microfe::ConvergenceReport report;
  Manifest manifest;
  std::vector<std::string> cached_stages;
};

/// Meshes and solves the first `rungs` sizing rungs on linear tets and
/// writes convergence.txt / convergence.csv plus converge_manifest.json.
ConvergenceRun run_convergence(const PipelineConfig& cfg, int rungs);

/// Probe slabs for a volume: the configured z positions, else every frame
/// strictly inside the pullback, else the mid-plane.
std::vector<microfe::ProbeSlab> default_probes(const LabelVolume& vol, const ConvergenceConfig& cfg);

/// Quality report as JSON text (stable key order and number formatting).
std::string quality_json(const mesher::QualityReport& q);

}  // namespace vox2fea::pipeline
