#pragma once

#include <map>
#include <string>
#include <vector>

#include "vox2fea/core/material.hpp"
#include "vox2fea/core/tet_mesh.hpp"

namespace vox2fea::fem {

inline constexpr const char* kLumenSurface = "LUMEN_SURFACE";
inline constexpr const char* kEndcapMin = "ENDCAP_ZMIN";
inline constexpr const char* kEndcapMax = "ENDCAP_ZMAX";

struct BoundarySpec {
  double pressure_kpa = 15.0;
  double endcap_tolerance_um = 20.0;
  std::string load_surface_name = kLumenSurface;
  std::string endcap_min_name = kEndcapMin;
  std::string endcap_max_name = kEndcapMax;

  void validate() const;
};

struct FeaModel {
  /// Lumen-free mesh holding the load surface and the end-cap node sets.
  TetMesh mesh;
  std::map<LabelCode, MaterialModel> materials;
  double pressure_kpa = 15.0;
  std::string load_surface = kLumenSurface;
  std::vector<std::string> fixed_node_sets;

  /// Every label has a material; the load surface and fixed sets exist and
  /// are non-empty; no lumen elements remain.
  void validate() const;
};

/// Faces of tissue elements that touch a lumen element, sorted.
std::vector<FaceRef> extract_lumen_surface(const TetMesh& mesh);

struct LumenRemoval {
  TetMesh mesh;
  /// Old node index -> new index, -1 for deleted nodes.
  std::vector<std::int64_t> node_map;
  /// Old element index -> new index, -1 for deleted elements.
  std::vector<std::int64_t> element_map;
};

/// Drops lumen elements and the nodes only they used, renumbering nodes,
/// elements, node sets and surfaces (surface faces on deleted elements are
/// dropped).
LumenRemoval remove_lumen(const TetMesh& mesh);

struct EndcapSets {
  std::vector<std::uint32_t> zmin, zmax;
};

/// Nodes within the tolerance of the lowest and highest z.
EndcapSets find_endcap_nodes(const TetMesh& mesh, const BoundarySpec& spec);

/// Material per tissue label; the refinement layers share the wall card.
std::map<LabelCode, MaterialModel> material_cards();

/// Lumen surface, lumen removal, optional quadratic elevation, end caps
/// (found after elevation so midside cap nodes are fixed too) and materials.
FeaModel build_fea_model(const TetMesh& mesh_with_lumen, const BoundarySpec& spec = {},
                         ElementOrder order = ElementOrder::linear,
                         const std::map<LabelCode, MaterialModel>& materials = material_cards());

}  // namespace vox2fea::fem
