#include "dlsfem/patch.hpp"

#include "dlsfem/error.hpp"
#include "dlsfem/parallel.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace dlsfem {

int default_patch_size(int degree) {
  static constexpr std::array<int, 5> sizes = {4, 8, 13, 19, 26};
  if (degree < 1 || degree > 5) throw ValidationError("patch size: degree must be in [1, 5], got " + std::to_string(degree));
  return sizes[degree - 1];
}

namespace {

constexpr double kTieTolerance = 1e-12;

}  // namespace

ElementPatch build_patch(const Mesh& mesh, int element, int threshold) {
  if (element < 0 || element >= mesh.num_cells()) throw ValidationError("patch: element id out of range");
  if (threshold < 1) throw ValidationError("patch: threshold must be >= 1");

  std::vector<int> candidates = {element};
  std::unordered_set<int> seen = {element};
  std::vector<int> frontier = {element};
  int layers = 0;
  while (static_cast<int>(candidates.size()) < threshold) {
    std::vector<int> next;
    for (int k : frontier)
      for (int nb : mesh.cell_neighbors(k))
        if (seen.insert(nb).second) next.push_back(nb);
    if (next.empty())
      throw ValidationError("patch: element " + std::to_string(element) + " reaches only " +
                            std::to_string(candidates.size()) + " elements, fewer than the threshold " +
                            std::to_string(threshold));
    candidates.insert(candidates.end(), next.begin(), next.end());
    frontier = std::move(next);
    ++layers;
  }

  const Point& x0 = mesh.barycenter(element);
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(candidates.size());
  for (int k : candidates) keyed.emplace_back((mesh.barycenter(k) - x0).norm(), k);
  std::sort(keyed.begin(), keyed.end());
  // Distances equal up to round-off count as ties and are ordered by id.
  const double tie = kTieTolerance * std::max(keyed.back().first, 1e-300);
  for (std::size_t begin = 0; begin < keyed.size();) {
    std::size_t end = begin + 1;
    while (end < keyed.size() && keyed[end].first - keyed[end - 1].first <= tie) ++end;
    std::sort(keyed.begin() + begin, keyed.begin() + end, [](const auto& a, const auto& b) { return a.second < b.second; });
    begin = end;
  }

  ElementPatch patch;
  patch.center = element;
  patch.layers = layers;
  patch.members.reserve(threshold);
  for (int i = 0; i < threshold; ++i) patch.members.push_back(keyed[i].second);
  return patch;
}

std::vector<ElementPatch> build_all_patches(const Mesh& mesh, int threshold, int threads) {
  std::vector<ElementPatch> patches(mesh.num_cells());
  parallel_chunks(mesh.num_cells(), threads, [&](int, int begin, int end) {
    for (int k = begin; k < end; ++k) patches[k] = build_patch(mesh, k, threshold);
  });
  return patches;
}

int graph_radius(const Mesh& mesh, const ElementPatch& patch) {
  std::unordered_map<int, int> distance = {{patch.center, 0}};
  std::queue<int> queue;
  queue.push(patch.center);
  std::unordered_set<int> wanted(patch.members.begin(), patch.members.end());
  std::size_t found = 0;
  int radius = 0;
  while (!queue.empty() && found < wanted.size()) {
    const int k = queue.front();
    queue.pop();
    if (wanted.count(k)) {
      ++found;
      radius = std::max(radius, distance[k]);
    }
    for (int nb : mesh.cell_neighbors(k))
      if (distance.emplace(nb, distance[k] + 1).second) queue.push(nb);
  }
  return radius;
}

}  // namespace dlsfem
