#pragma once

#include "dlsfem/mesh.hpp"

#include <vector>

namespace dlsfem {

/// Element patch S(K): the `threshold` elements nearest to K (barycenter distance,
/// ties by ascending id) among the face-neighbour layers grown around K.
/// members[0] is always the center element.
struct ElementPatch {
  int center = -1;
  std::vector<int> members;
  /// Number of neighbour layers grown before the candidate set reached the threshold.
  int layers = 0;

  int size() const noexcept { return static_cast<int>(members.size()); }
};

/// Uniform patch cardinality used for degree m in 2D (1 <= m <= 5).
int default_patch_size(int degree);

ElementPatch build_patch(const Mesh& mesh, int element, int threshold);

std::vector<ElementPatch> build_all_patches(const Mesh& mesh, int threshold, int threads = 1);

/// Largest face-adjacency distance from the center to a member.
int graph_radius(const Mesh& mesh, const ElementPatch& patch);

}  // namespace dlsfem
