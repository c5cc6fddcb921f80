#pragma once

#include "dlsfem/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>

namespace dlsfem {

/// Lame parameters of an isotropic 2D material.
struct MaterialParams {
  double lambda = 1.0;
  double mu = 1.0;
  static constexpr int dim = 2;

  /// Throws ValidationError unless lambda > 0 and mu > 0.
  void validate() const;
};

/// Symmetric 2x2 tensor stored as (xx, xy, yy).
struct SymTensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static SymTensor2 identity() { return {1.0, 0.0, 1.0}; }
  static SymTensor2 from_matrix(const Eigen::Matrix2d& m) { return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)}; }

  double trace() const { return xx + yy; }
  /// Frobenius inner product (off-diagonal counted twice).
  double dot(const SymTensor2& o) const { return xx * o.xx + 2.0 * xy * o.xy + yy * o.yy; }
  double squared_norm() const { return dot(*this); }
  Eigen::Vector2d times(const Eigen::Vector2d& n) const { return {xx * n.x() + xy * n.y(), xy * n.x() + yy * n.y()}; }
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << xx, xy, xy, yy;
    return m;
  }

  friend SymTensor2 operator+(const SymTensor2& a, const SymTensor2& b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
  friend SymTensor2 operator-(const SymTensor2& a, const SymTensor2& b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
  friend SymTensor2 operator*(double s, const SymTensor2& a) { return {s * a.xx, s * a.xy, s * a.yy}; }
};

/// A tau = (tau - lambda / (d lambda + 2 mu) tr(tau) I) / (2 mu).
SymTensor2 compliance_apply(const SymTensor2& tau, const MaterialParams& p);
/// Inverse of the compliance: 2 mu eps + lambda tr(eps) I.
SymTensor2 stiffness_apply(const SymTensor2& eps, const MaterialParams& p);
/// Symmetric part of a displacement gradient (grad(i, j) = d u_i / d x_j).
SymTensor2 strain(const Eigen::Matrix2d& grad);

/// Closed-form displacement with hand-written first and second derivatives; stress,
/// body force and boundary data are derived from them.
struct ManufacturedSolution {
  std::string name;
  MaterialParams material;
  std::function<Eigen::Vector2d(const Point&)> displacement;
  /// (i, j) = d u_i / d x_j
  std::function<Eigen::Matrix2d(const Point&)> displacement_gradient;
  /// Hessian of each displacement component.
  std::function<std::array<Eigen::Matrix2d, 2>(const Point&)> displacement_hessian;

  SymTensor2 stress(const Point& x) const;
  /// f = -div(sigma).
  Eigen::Vector2d body_force(const Point& x) const;
  /// Dirichlet data g = u.
  Eigen::Vector2d dirichlet(const Point& x) const { return displacement(x); }
  /// Neumann data h = sigma n.
  Eigen::Vector2d traction(const Point& x, const Eigen::Vector2d& normal) const { return stress(x).times(normal); }
};

/// Smooth benchmark on [0,1]^2:
///   u1 = sin(2 pi y)(cos(2 pi x) - 1) + sin(pi x) sin(pi y) / (1 + lambda)
///   u2 = sin(2 pi x)(1 - cos(2 pi y)) + sin(pi x) sin(pi y) / (1 + lambda)
ManufacturedSolution example1_solution(const MaterialParams& p);

/// Patch-test fixture u = ((x + 2y)^m, (3x - y)^m), reproduced exactly by degree-m spaces.
ManufacturedSolution polynomial_solution(int degree, const MaterialParams& p);

}  // namespace dlsfem
