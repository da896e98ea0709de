#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vox2fea {

using Vec3 = Eigen::Vector3d;
using LabelCode = std::uint8_t;

/// Material codes used from pooling onward.
namespace label {
inline constexpr LabelCode background = 0;
inline constexpr LabelCode wall = 1;  // pooled fibrous + mixed tissue
inline constexpr LabelCode lipid = 2;
inline constexpr LabelCode calcium = 3;
inline constexpr LabelCode lumen = 4;
inline constexpr LabelCode inner_refine = 5;
inline constexpr LabelCode outer_refine = 6;
inline constexpr int count = 7;
}  // namespace label

/// Codes of the raw segmentation palette that frames arrive in.
namespace raw_label {
inline constexpr LabelCode background = 0;
inline constexpr LabelCode fibrous = 1;
inline constexpr LabelCode lipid = 2;
inline constexpr LabelCode calcium = 3;
inline constexpr LabelCode mixed = 7;
}  // namespace raw_label

/// Wall-equivalent tissue: the refinement layers are wall with a sizing tag.
constexpr bool is_wall_like(LabelCode c) {
  return c == label::wall || c == label::inner_refine || c == label::outer_refine;
}
constexpr bool is_tissue(LabelCode c) {
  return c == label::wall || c == label::lipid || c == label::calcium ||
         c == label::inner_refine || c == label::outer_refine;
}

std::string label_name(LabelCode code);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an operation's arguments does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A solver or algorithm could not produce a result.
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace vox2fea
