#pragma once

#include "dlsfem/mesh.hpp"

#include <vector>

namespace dlsfem {

struct QuadraturePoint {
  Point point = Point::Zero();
  double weight = 0.0;
};

/// Gauss-Legendre rule on [0, 1] with n points (exact to degree 2n - 1).
std::vector<QuadraturePoint> gauss_legendre_unit(int n);

/// Rule on the reference triangle (0,0), (1,0), (0,1) exact to total degree `degree`.
/// Collapsed (Duffy) product of Gauss-Legendre rules; all weights positive, sum 1/2.
const std::vector<QuadraturePoint>& reference_triangle_rule(int degree);

/// Rule on the segment [0, 1] exact to degree `degree`; point.x() holds the abscissa.
const std::vector<QuadraturePoint>& reference_segment_rule(int degree);

std::vector<QuadraturePoint> triangle_quadrature(const Triangle& triangle, int degree);

/// Volume rule over a cell: the triangle rule mapped onto each fan sub-triangle.
std::vector<QuadraturePoint> cell_quadrature(const Mesh& mesh, int cell, int degree);

std::vector<QuadraturePoint> face_quadrature(const Mesh& mesh, int face, int degree);

}  // namespace dlsfem
