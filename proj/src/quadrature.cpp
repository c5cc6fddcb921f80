#include "dlsfem/quadrature.hpp"

#include "dlsfem/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace dlsfem {

namespace {

// P_n(x) and P_{n-1}(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace

std::vector<QuadraturePoint> gauss_legendre_unit(int n) {
  if (n < 1) throw ValidationError("gauss-legendre: n must be >= 1");
  std::vector<QuadraturePoint> rule(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, pm] = legendre(n, x);
      const double dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = legendre(n, x);
    const double dp = n * (x * pn - pm) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule[n - 1 - i] = {Point(0.5 * (x + 1.0), 0.0), 0.5 * w};
  }
  return rule;
}

namespace {

std::vector<QuadraturePoint> make_triangle_rule(int degree) {
  // x = u, y = v (1 - u), dx dy = (1 - u) du dv: degree + 1 in u, degree in v.
  const auto g = gauss_legendre_unit((degree + 3) / 2);
  std::vector<QuadraturePoint> rule;
  rule.reserve(g.size() * g.size());
  for (const auto& a : g)
    for (const auto& b : g) {
      const double u = a.point.x();
      const double v = b.point.x();
      rule.push_back({Point(u, v * (1.0 - u)), a.weight * b.weight * (1.0 - u)});
    }
  return rule;
}

}  // namespace

const std::vector<QuadraturePoint>& reference_triangle_rule(int degree) {
  static std::mutex mutex;
  static std::map<int, std::vector<QuadraturePoint>> cache;
  if (degree < 0) throw ValidationError("quadrature degree must be >= 0");
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_triangle_rule(degree)).first;
  return it->second;
}

const std::vector<QuadraturePoint>& reference_segment_rule(int degree) {
  static std::mutex mutex;
  static std::map<int, std::vector<QuadraturePoint>> cache;
  if (degree < 0) throw ValidationError("quadrature degree must be >= 0");
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, gauss_legendre_unit(degree / 2 + 1)).first;
  return it->second;
}

std::vector<QuadraturePoint> triangle_quadrature(const Triangle& t, int degree) {
  const auto& ref = reference_triangle_rule(degree);
  const Point e1 = t[1] - t[0];
  const Point e2 = t[2] - t[0];
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  std::vector<QuadraturePoint> out;
  out.reserve(ref.size());
  for (const auto& q : ref) out.push_back({t[0] + q.point.x() * e1 + q.point.y() * e2, q.weight * jac});
  return out;
}

std::vector<QuadraturePoint> cell_quadrature(const Mesh& mesh, int cell, int degree) {
  std::vector<QuadraturePoint> out;
  for (const auto& t : mesh.geometry(cell).triangles) {
    auto part = triangle_quadrature(t, degree);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<QuadraturePoint> face_quadrature(const Mesh& mesh, int face, int degree) {
  const auto& f = mesh.face(face);
  const Point a = mesh.vertex(f.vertices[0]);
  const Point b = mesh.vertex(f.vertices[1]);
  const auto& ref = reference_segment_rule(degree);
  std::vector<QuadraturePoint> out;
  out.reserve(ref.size());
  for (const auto& q : ref) out.push_back({a + q.point.x() * (b - a), q.weight * f.length});
  return out;
}

}  // namespace dlsfem
