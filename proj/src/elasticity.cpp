#include "dlsfem/elasticity.hpp"

#include "dlsfem/error.hpp"

#include <cmath>
#include <numbers>

namespace dlsfem {

void MaterialParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("material: lambda must be positive");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("material: mu must be positive");
}

SymTensor2 compliance_apply(const SymTensor2& tau, const MaterialParams& p) {
  // Deviatoric and volumetric parts separately, so large lambda causes no cancellation.
  const double half_tr = 0.5 * tau.trace();
  const double s = 1.0 / (2.0 * p.mu);
  const double v = half_tr / (MaterialParams::dim * p.lambda + 2.0 * p.mu);
  return {s * (tau.xx - half_tr) + v, s * tau.xy, s * (tau.yy - half_tr) + v};
}

SymTensor2 stiffness_apply(const SymTensor2& eps, const MaterialParams& p) {
  const double tr = eps.trace();
  return {2.0 * p.mu * eps.xx + p.lambda * tr, 2.0 * p.mu * eps.xy, 2.0 * p.mu * eps.yy + p.lambda * tr};
}

SymTensor2 strain(const Eigen::Matrix2d& grad) { return SymTensor2::from_matrix(grad); }

SymTensor2 ManufacturedSolution::stress(const Point& x) const {
  return stiffness_apply(strain(displacement_gradient(x)), material);
}

Eigen::Vector2d ManufacturedSolution::body_force(const Point& x) const {
  // d_j sigma_ij = mu (d_jj u_i + d_ij u_j) + lambda d_i (d_k u_k)
  const auto h = displacement_hessian(x);
  const double mu = material.mu;
  const double lambda = material.lambda;
  Eigen::Vector2d div;
  for (int i = 0; i < 2; ++i) {
    double s = 0.0;
    for (int j = 0; j < 2; ++j) s += mu * (h[i](j, j) + h[j](i, j));
    for (int k = 0; k < 2; ++k) s += lambda * h[k](i, k);
    div[i] = s;
  }
  return -div;
}

ManufacturedSolution example1_solution(const MaterialParams& p) {
  p.validate();
  using std::cos;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  const double c = 1.0 / (1.0 + p.lambda);
  ManufacturedSolution s;
  s.name = "example1";
  s.material = p;
  s.displacement = [c](const Point& x) {
    const double b = c * sin(pi * x.x()) * sin(pi * x.y());
    return Eigen::Vector2d(sin(2 * pi * x.y()) * (cos(2 * pi * x.x()) - 1.0) + b,
                           sin(2 * pi * x.x()) * (1.0 - cos(2 * pi * x.y())) + b);
  };
  s.displacement_gradient = [c](const Point& x) {
    const double X = x.x(), Y = x.y();
    const double bx = c * pi * cos(pi * X) * sin(pi * Y);
    const double by = c * pi * sin(pi * X) * cos(pi * Y);
    Eigen::Matrix2d g;
    g(0, 0) = -2 * pi * sin(2 * pi * Y) * sin(2 * pi * X) + bx;
    g(0, 1) = 2 * pi * cos(2 * pi * Y) * (cos(2 * pi * X) - 1.0) + by;
    g(1, 0) = 2 * pi * cos(2 * pi * X) * (1.0 - cos(2 * pi * Y)) + bx;
    g(1, 1) = 2 * pi * sin(2 * pi * X) * sin(2 * pi * Y) + by;
    return g;
  };
  s.displacement_hessian = [c](const Point& x) {
    const double X = x.x(), Y = x.y();
    const double pi2 = pi * pi;
    const double bxx = -c * pi2 * sin(pi * X) * sin(pi * Y);
    const double bxy = c * pi2 * cos(pi * X) * cos(pi * Y);
    std::array<Eigen::Matrix2d, 2> h;
    h[0](0, 0) = -4 * pi2 * sin(2 * pi * Y) * cos(2 * pi * X) + bxx;
    h[0](0, 1) = h[0](1, 0) = -4 * pi2 * cos(2 * pi * Y) * sin(2 * pi * X) + bxy;
    h[0](1, 1) = -4 * pi2 * sin(2 * pi * Y) * (cos(2 * pi * X) - 1.0) + bxx;
    h[1](0, 0) = -4 * pi2 * sin(2 * pi * X) * (1.0 - cos(2 * pi * Y)) + bxx;
    h[1](0, 1) = h[1](1, 0) = 4 * pi2 * cos(2 * pi * X) * sin(2 * pi * Y) + bxy;
    h[1](1, 1) = 4 * pi2 * sin(2 * pi * X) * cos(2 * pi * Y) + bxx;
    return h;
  };
  return s;
}

ManufacturedSolution polynomial_solution(int degree, const MaterialParams& p) {
  p.validate();
  if (degree < 1) throw ValidationError("polynomial solution: degree must be >= 1");
  const int m = degree;
  // u_i = (a_i . x)^m with a_1 = (1, 2), a_2 = (3, -1).
  const std::array<Eigen::Vector2d, 2> dirs = {Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(3.0, -1.0)};
  auto power = [](double t, int k) { return k < 0 ? 0.0 : std::pow(t, k); };
  ManufacturedSolution s;
  s.name = "polynomial" + std::to_string(m);
  s.material = p;
  s.displacement = [=](const Point& x) {
    return Eigen::Vector2d(power(dirs[0].dot(x), m), power(dirs[1].dot(x), m));
  };
  s.displacement_gradient = [=](const Point& x) {
    Eigen::Matrix2d g;
    for (int i = 0; i < 2; ++i) g.row(i) = m * power(dirs[i].dot(x), m - 1) * dirs[i].transpose();
    return g;
  };
  s.displacement_hessian = [=](const Point& x) {
    std::array<Eigen::Matrix2d, 2> h;
    for (int i = 0; i < 2; ++i) h[i] = m * (m - 1) * power(dirs[i].dot(x), m - 2) * dirs[i] * dirs[i].transpose();
    return h;
  };
  return s;
}

}  // namespace dlsfem
