#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dlsfem {

using Point = Eigen::Vector2d;

enum class FaceKind { interior, dirichlet, neumann };

const char* to_string(FaceKind kind);

/// An edge of the partition. The normal points out of cells[0]; cells[1] is -1 on the boundary.
struct Face {
  std::array<int, 2> vertices{};
  std::array<int, 2> cells{-1, -1};
  Point normal = Point::Zero();
  Point midpoint = Point::Zero();
  double length = 0.0;
  FaceKind kind = FaceKind::interior;

  bool is_boundary() const noexcept { return cells[1] < 0; }
  /// Outward normal seen from `cell`, which must be adjacent to this face.
  Point outward_normal(int cell) const noexcept { return cell == cells[0] ? normal : Point(-normal); }
  int other_cell(int cell) const noexcept { return cell == cells[0] ? cells[1] : cells[0]; }
};

using Triangle = std::array<Point, 3>;

struct CellGeometry {
  Point barycenter = Point::Zero();
  double area = 0.0;
  double diameter = 0.0;
  /// Lower bound of the inscribed radius (see Mesh::inradius_estimate).
  double inradius = 0.0;
  /// Fan triangulation; for triangles the cell itself, otherwise a fan around the barycenter.
  std::vector<Triangle> triangles;
};

struct BoundingBox {
  Point lower = Point::Zero();
  Point upper = Point::Zero();
  double area() const { return (upper - lower).prod(); }
};

/// Conforming partition of an axis-aligned box into convex polygons.
///
/// Immutable after construction. The constructor orients every cell counterclockwise,
/// builds the face table and the per-cell geometry, and validates convexity, positive
/// area and face conformity (each edge shared by at most two cells, with opposite
/// orientations). Boundary faces start out Dirichlet; see classify_boundary().
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells, double nominal_h = 0.0);

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_cells() const noexcept { return static_cast<int>(cells_.size()); }
  int num_faces() const noexcept { return static_cast<int>(faces_.size()); }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const Point& vertex(int i) const { return vertices_[i]; }
  const std::vector<std::vector<int>>& cells() const noexcept { return cells_; }
  const std::vector<int>& cell(int k) const { return cells_[k]; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<int>& cell_faces(int k) const { return cell_faces_[k]; }
  const std::vector<int>& cell_neighbors(int k) const { return cell_neighbors_[k]; }
  const CellGeometry& geometry(int k) const { return geometry_[k]; }
  const Point& barycenter(int k) const { return geometry_[k].barycenter; }

  BoundingBox domain() const noexcept { return domain_; }
  /// Generator-supplied mesh level (1/n for structured meshes). Falls back to h_max.
  double nominal_h() const noexcept { return nominal_h_ > 0.0 ? nominal_h_ : h_max(); }
  double h_max() const noexcept;

  int count_faces(FaceKind kind) const;

  /// Copy of this mesh with every boundary face relabeled; interior faces keep their kind.
  Mesh with_boundary_kinds(const std::function<FaceKind(const Face&)>& label) const;

 private:
  void build_faces();
  void build_geometry();

  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Face> faces_;
  std::vector<std::vector<int>> cell_faces_;
  std::vector<std::vector<int>> cell_neighbors_;
  std::vector<CellGeometry> geometry_;
  BoundingBox domain_;
  double nominal_h_ = 0.0;
};

/// Signed area by the shoelace formula (positive for counterclockwise polygons).
double polygon_signed_area(const std::vector<Point>& polygon);
/// Area centroid of a simple polygon.
Point polygon_centroid(const std::vector<Point>& polygon);

/// n x n squares of [0,1]^2, each cut along its (i,j)-(i+1,j+1) diagonal.
Mesh generate_unit_square_triangular(int n);

/// Voronoi partition of [0,1]^2 for explicit seeds, each cell obtained by clipping the
/// square against the bisectors of nearer seeds. Throws ValidationError on coincident seeds.
Mesh voronoi_from_seeds(const std::vector<Point>& seeds);

/// `n_seeds` uniform random seeds (deterministic in rng_seed) followed by `n_lloyd`
/// centroid relaxation sweeps.
Mesh generate_voronoi_polygonal(int n_seeds, int n_lloyd, std::uint64_t rng_seed);

/// Boundary faces whose midpoint satisfies `is_neumann` become Neumann, the rest Dirichlet.
/// Throws ValidationError when no Dirichlet face is left.
Mesh classify_boundary(const Mesh& mesh, const std::function<bool(const Point&)>& is_neumann);

/// Parses a boundary rule: "x==c", "y==c", "none"/"never" or "all"/"always".
std::function<bool(const Point&)> parse_boundary_rule(const std::string& rule);

struct CellQuality {
  double diameter = 0.0;
  double inradius = 0.0;
  double aspect = 0.0;               ///< diameter / inradius
  double min_face_to_inradius = 0.0;  ///< min over faces of h_e / inradius
};

struct QualityReport {
  std::vector<CellQuality> cells;
  double max_aspect = 0.0;
  double min_face_to_inradius = 0.0;
};

QualityReport quality_metrics(const Mesh& mesh);

/// JSON mesh files: {"vertices": [[x,y],...], "cells": [[i0,i1,...],...],
/// "boundary": {"neumann_rule": "x==1"} or {"neumann_faces": [[a,b],...]}, "nominal_h": h}.
/// write_mesh_json always stores the explicit face list.
Mesh read_mesh_json(const std::string& path);
void write_mesh_json(const Mesh& mesh, const std::string& path);
std::string mesh_to_json_string(const Mesh& mesh);
Mesh mesh_from_json_string(const std::string& text);

}  // namespace dlsfem
