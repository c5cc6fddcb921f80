#pragma once

// Independent reference computations used by the tests. None of these call into the
// library code they are compared against.

#include "dlsfem/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using dlsfem::Point;

// Face-neighbour relation rebuilt from the raw vertex lists: two cells touch when they
// share an edge (unordered vertex pair).
inline std::vector<std::vector<int>> edge_adjacency(const dlsfem::Mesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.num_cells());
  for (int a = 0; a < mesh.num_cells(); ++a)
    for (int b = a + 1; b < mesh.num_cells(); ++b) {
      const auto& ca = mesh.cell(a);
      const auto& cb = mesh.cell(b);
      int shared = 0;
      for (int v : ca) shared += std::count(cb.begin(), cb.end(), v) > 0;
      if (shared >= 2) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
  return adj;
}

inline Point shoelace_centroid(const dlsfem::Mesh& mesh, int k) {
  const auto& c = mesh.cell(k);
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point& p = mesh.vertex(c[i]);
    const Point& q = mesh.vertex(c[(i + 1) % c.size()]);
    const double cr = p.x() * q.y() - q.x() * p.y();
    a += cr;
    cx += (p.x() + q.x()) * cr;
    cy += (p.y() + q.y()) * cr;
  }
  return Point(cx / (3.0 * a), cy / (3.0 * a));
}

// BFS closure until the candidate set reaches the threshold, then a full sort of every
// candidate by (distance, id).
inline std::vector<int> brute_force_patch(const dlsfem::Mesh& mesh, int k, int threshold) {
  const auto adj = edge_adjacency(mesh);
  std::set<int> set{k};
  while (static_cast<int>(set.size()) < threshold) {
    std::set<int> next = set;
    for (int e : set)
      for (int n : adj[e]) next.insert(n);
    if (next.size() == set.size()) return {};
    set = next;
  }
  const Point xk = shoelace_centroid(mesh, k);
  std::vector<std::pair<double, int>> all;
  for (int e : set) all.emplace_back((shoelace_centroid(mesh, e) - xk).norm(), e);
  std::sort(all.begin(), all.end());
  // distances within 1e-12 relative are ties, ordered by id
  const double tol = 1e-12 * all.back().first;
  std::vector<int> out;
  std::size_t i = 0;
  while (i < all.size()) {
    std::vector<int> group{all[i].second};
    std::size_t j = i + 1;
    for (; j < all.size() && all[j].first - all[j - 1].first <= tol; ++j) group.push_back(all[j].second);
    std::sort(group.begin(), group.end());
    out.insert(out.end(), group.begin(), group.end());
    i = j;
  }
  out.resize(threshold);
  return out;
}

// Appendix-style linear reconstruction: with A the (n-1) x 2 matrix of offsets
// (x_j - x_0, y_j - y_0), M = (A^T A)^{-1} A^T and the unscaled coefficient matrix is
// [[1, 0], [-M 1, M]].
inline Eigen::MatrixXd linear_block_formula(const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd a(n - 1, 2);
  for (int j = 1; j < n; ++j) a.row(j - 1) = (pts[j] - pts[0]).transpose();
  const Eigen::MatrixXd ata = a.transpose() * a;
  const Eigen::MatrixXd m = ata.inverse() * a.transpose();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, n);
  c(0, 0) = 1.0;
  c.block(1, 0, 2, 1) = -m.rowwise().sum();
  c.block(1, 1, 2, n - 1) = m;
  return c;
}

// Central difference of a scalar function.
inline Eigen::Vector2d fd_gradient(const std::function<double(const Point&)>& f, const Point& x, double h) {
  return {(f(x + Point(h, 0)) - f(x - Point(h, 0))) / (2 * h), (f(x + Point(0, h)) - f(x - Point(0, h))) / (2 * h)};
}

// Exact integral of x^a y^b over the triangle (0,0),(1,0),(0,1): a! b! / (a+b+2)!.
inline double reference_monomial_integral(int a, int b) {
  auto fact = [](int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

inline std::vector<Point> random_points(int n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    out.emplace_back(x, u(rng));
  }
  return out;
}

}  // namespace oracle
