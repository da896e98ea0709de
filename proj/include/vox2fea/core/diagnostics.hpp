#pragma once

#include <string>
#include <vector>

namespace vox2fea {

/// Collects non-fatal findings from an operation.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace vox2fea
