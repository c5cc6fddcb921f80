#include "dlsfem/mesh.hpp"

#include "dlsfem/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace dlsfem {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double triangle_area(const Triangle& t) { return 0.5 * cross(t[1] - t[0], t[2] - t[0]); }

double triangle_inradius(const Triangle& t) {
  const double perimeter = (t[1] - t[0]).norm() + (t[2] - t[1]).norm() + (t[0] - t[2]).norm();
  return 2.0 * std::abs(triangle_area(t)) / perimeter;
}

}  // namespace

const char* to_string(FaceKind kind) {
  switch (kind) {
    case FaceKind::interior: return "interior";
    case FaceKind::dirichlet: return "dirichlet";
    case FaceKind::neumann: return "neumann";
  }
  return "?";
}

double polygon_signed_area(const std::vector<Point>& polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) twice += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * twice;
}

Point polygon_centroid(const std::vector<Point>& polygon) {
  // Shift to the first vertex to limit cancellation.
  const Point origin = polygon.front();
  double twice_area = 0.0;
  Point acc = Point::Zero();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = polygon[i] - origin;
    const Point b = polygon[(i + 1) % n] - origin;
    const double c = cross(a, b);
    twice_area += c;
    acc += c * (a + b);
  }
  return origin + acc / (3.0 * twice_area);
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells, double nominal_h)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), nominal_h_(nominal_h) {
  if (vertices_.empty() || cells_.empty()) throw ValidationError("mesh: no vertices or no cells");
  domain_.lower = domain_.upper = vertices_.front();
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw ValidationError("mesh: non-finite vertex coordinate");
    domain_.lower = domain_.lower.cwiseMin(v);
    domain_.upper = domain_.upper.cwiseMax(v);
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    auto& cell = cells_[k];
    if (cell.size() < 3) throw ValidationError("mesh: cell " + std::to_string(k) + " has fewer than 3 vertices");
    std::vector<Point> poly;
    for (int v : cell) {
      if (v < 0 || v >= num_vertices())
        throw ValidationError("mesh: cell " + std::to_string(k) + " references missing vertex " + std::to_string(v));
      poly.push_back(vertices_[v]);
    }
    const double area = polygon_signed_area(poly);
    if (area < 0.0) std::reverse(cell.begin(), cell.end());
  }
  build_geometry();
  build_faces();
}

void Mesh::build_geometry() {
  geometry_.resize(cells_.size());
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto& cell = cells_[k];
    std::vector<Point> poly;
    for (int v : cell) poly.push_back(vertices_[v]);
    auto& g = geometry_[k];
    g.area = polygon_signed_area(poly);
    double diameter = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = i + 1; j < poly.size(); ++j) diameter = std::max(diameter, (poly[i] - poly[j]).norm());
    g.diameter = diameter;
    const double tol = 1e-12 * diameter * diameter;
    if (!(g.area > tol)) throw ValidationError("mesh: cell " + std::to_string(k) + " has non-positive area");
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point e0 = poly[(i + 1) % n] - poly[i];
      const Point e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
      if (e0.norm() <= 1e-12 * diameter) throw ValidationError("mesh: cell " + std::to_string(k) + " has a repeated vertex");
      if (cross(e0, e1) < -tol) throw ValidationError("mesh: cell " + std::to_string(k) + " is not convex");
    }
    g.barycenter = polygon_centroid(poly);

    g.triangles.clear();
    if (n == 3) {
      g.triangles.push_back({poly[0], poly[1], poly[2]});
    } else {
      for (std::size_t i = 0; i < n; ++i) g.triangles.push_back({g.barycenter, poly[i], poly[(i + 1) % n]});
    }

    // Two lower bounds of the inscribed radius: the largest circle centered at the
    // barycenter, and the largest inscribed circle of a fan triangle.
    double centered = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = poly[i];
      const Point e = poly[(i + 1) % n] - a;
      centered = std::min(centered, cross(e, g.barycenter - a) / e.norm());
    }
    double fan = 0.0;
    for (const auto& t : g.triangles) fan = std::max(fan, triangle_inradius(t));
    g.inradius = std::max(centered, fan);
  }
}

void Mesh::build_faces() {
  faces_.clear();
  cell_faces_.assign(cells_.size(), {});
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(cells_.size() * 4);
  for (int k = 0; k < num_cells(); ++k) {
    const auto& cell = cells_[k];
    const std::size_t n = cell.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = cell[i];
      const int b = cell[(i + 1) % n];
      const auto key = edge_key(a, b);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Face f;
        f.vertices = {a, b};
        f.cells = {k, -1};
        const Point e = vertices_[b] - vertices_[a];
        f.length = e.norm();
        f.normal = Point(e.y(), -e.x()) / f.length;
        f.midpoint = 0.5 * (vertices_[a] + vertices_[b]);
        f.kind = FaceKind::dirichlet;
        lookup.emplace(key, num_faces());
        cell_faces_[k].push_back(num_faces());
        faces_.push_back(f);
      } else {
        Face& f = faces_[it->second];
        if (f.cells[1] >= 0 || f.vertices[0] != b || f.vertices[1] != a)
          throw ValidationError("mesh: edge (" + std::to_string(a) + "," + std::to_string(b) +
                                ") is not shared consistently by at most two cells");
        f.cells[1] = k;
        f.kind = FaceKind::interior;
        cell_faces_[k].push_back(it->second);
      }
    }
  }
  cell_neighbors_.assign(cells_.size(), {});
  for (int k = 0; k < num_cells(); ++k)
    for (int f : cell_faces_[k])
      if (!faces_[f].is_boundary()) cell_neighbors_[k].push_back(faces_[f].other_cell(k));
}

double Mesh::h_max() const noexcept {
  double h = 0.0;
  for (const auto& g : geometry_) h = std::max(h, g.diameter);
  return h;
}

int Mesh::count_faces(FaceKind kind) const {
  return static_cast<int>(std::count_if(faces_.begin(), faces_.end(), [kind](const Face& f) { return f.kind == kind; }));
}

Mesh Mesh::with_boundary_kinds(const std::function<FaceKind(const Face&)>& label) const {
  Mesh copy = *this;
  for (auto& f : copy.faces_) {
    if (!f.is_boundary()) continue;
    f.kind = label(f);
    if (f.kind == FaceKind::interior) throw ValidationError("mesh: boundary face labeled interior");
  }
  return copy;
}

Mesh generate_unit_square_triangular(int n) {
  if (n < 1) throw ValidationError("triangular mesh: n must be >= 1");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(vertices), std::move(cells), 1.0 / n);
}

namespace {

// Keeps the part of a convex polygon where (x - mid) . dir <= 0.
std::vector<Point> clip_half_plane(const std::vector<Point>& poly, const Point& mid, const Point& dir) {
  std::vector<Point> out;
  out.reserve(poly.size() + 1);
  const std::size_t n = poly.size();
  const double eps = 1e-15 * dir.norm();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const double da = (a - mid).dot(dir);
    const double db = (b - mid).dot(dir);
    const bool ina = da <= eps;
    const bool inb = db <= eps;
    if (ina) out.push_back(a);
    if (ina != inb && std::abs(da - db) > 0.0) {
      const double t = da / (da - db);
      if (t > 0.0 && t < 1.0) out.push_back(a + t * (b - a));
    }
  }
  // Drop consecutive near-duplicates produced by cuts through existing vertices.
  std::vector<Point> clean;
  for (const auto& p : out)
    if (clean.empty() || (p - clean.back()).norm() > 1e-14) clean.push_back(p);
  while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-14) clean.pop_back();
  return clean;
}

class SeedGrid {
 public:
  explicit SeedGrid(const std::vector<Point>& seeds) : seeds_(seeds) {
    dim_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(seeds.size()) / 2.0)));
    size_ = 1.0 / dim_;
    buckets_.assign(static_cast<std::size_t>(dim_) * dim_, {});
    for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
      const auto [bx, by] = bucket_of(seeds[i]);
      buckets_[static_cast<std::size_t>(by) * dim_ + bx].push_back(i);
    }
  }

  std::pair<int, int> bucket_of(const Point& p) const {
    const int bx = std::clamp(static_cast<int>(p.x() / size_), 0, dim_ - 1);
    const int by = std::clamp(static_cast<int>(p.y() / size_), 0, dim_ - 1);
    return {bx, by};
  }

  // Voronoi cell of seed i inside the unit square.
  std::vector<Point> cell(int i) const {
    const Point s = seeds_[i];
    std::vector<Point> poly = {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
    const auto [cx, cy] = bucket_of(s);
    for (int ring = 0; ring <= dim_; ++ring) {
      double radius = 0.0;
      for (const auto& p : poly) radius = std::max(radius, (p - s).norm());
      // Seeds in this ring are at least (ring - 1) buckets away and cannot cut the
      // cell once that exceeds twice its circumradius about the seed.
      if (ring >= 2 && (ring - 1) * size_ > 2.0 * radius) break;
      for (int by = cy - ring; by <= cy + ring; ++by) {
        for (int bx = cx - ring; bx <= cx + ring; ++bx) {
          if (std::max(std::abs(bx - cx), std::abs(by - cy)) != ring) continue;
          if (bx < 0 || by < 0 || bx >= dim_ || by >= dim_) continue;
          for (int j : buckets_[static_cast<std::size_t>(by) * dim_ + bx]) {
            if (j == i) continue;
            const Point d = seeds_[j] - s;
            if (d.norm() <= 1e-12)
              throw ValidationError("voronoi: coincident seeds " + std::to_string(std::min(i, j)) + " and " +
                                    std::to_string(std::max(i, j)));
            poly = clip_half_plane(poly, 0.5 * (s + seeds_[j]), d);
          }
        }
      }
    }
    if (poly.size() < 3) throw ValidationError("voronoi: degenerate cell for seed " + std::to_string(i));
    return poly;
  }

 private:
  const std::vector<Point>& seeds_;
  int dim_ = 1;
  double size_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

std::vector<std::vector<Point>> voronoi_polygons(const std::vector<Point>& seeds) {
  if (seeds.size() < 2) throw ValidationError("voronoi: need at least 2 seeds");
  for (const auto& s : seeds)
    if (!(s.x() >= 0.0 && s.x() <= 1.0 && s.y() >= 0.0 && s.y() <= 1.0))
      throw ValidationError("voronoi: seed outside the unit square");
  SeedGrid grid(seeds);
  std::vector<std::vector<Point>> polys(seeds.size());
  for (int i = 0; i < static_cast<int>(seeds.size()); ++i) polys[i] = grid.cell(i);
  return polys;
}

}  // namespace

Mesh voronoi_from_seeds(const std::vector<Point>& seeds) {
  const auto polys = voronoi_polygons(seeds);

  // Cells are clipped independently, so shared corners agree only to round-off;
  // merge them through a hash on a tolerance grid.
  constexpr double merge_tol = 1e-10;
  constexpr double bucket = 1e-8;
  std::vector<Point> vertices;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;
  auto key_of = [](long long ix, long long iy) {
    return (static_cast<std::uint64_t>(ix + 1) << 32) ^ static_cast<std::uint64_t>(iy + 1);
  };
  auto vertex_id = [&](const Point& p) {
    const long long ix = std::llround(p.x() / bucket);
    const long long iy = std::llround(p.y() / bucket);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find(key_of(ix + dx, iy + dy));
        if (it == buckets.end()) continue;
        for (int v : it->second)
          if ((vertices[v] - p).norm() <= merge_tol) return v;
      }
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(p);
    buckets[key_of(ix, iy)].push_back(id);
    return id;
  };

  std::vector<std::vector<int>> cells;
  cells.reserve(polys.size());
  for (const auto& poly : polys) {
    std::vector<int> cell;
    for (const auto& p : poly) {
      // Snap to the square so boundary faces lie exactly on it.
      Point q = p;
      for (int c = 0; c < 2; ++c) {
        if (std::abs(q[c]) < merge_tol) q[c] = 0.0;
        if (std::abs(q[c] - 1.0) < merge_tol) q[c] = 1.0;
      }
      const int v = vertex_id(q);
      if (cell.empty() || cell.back() != v) cell.push_back(v);
    }
    while (cell.size() > 1 && cell.front() == cell.back()) cell.pop_back();
    cells.push_back(std::move(cell));
  }
  const double nominal = 1.0 / std::sqrt(static_cast<double>(seeds.size()));
  Mesh mesh(std::move(vertices), std::move(cells), nominal);
  for (const auto& f : mesh.faces()) {
    if (!f.is_boundary()) continue;
    const Point& m = f.midpoint;
    const bool on_square = std::min({m.x(), m.y(), 1.0 - m.x(), 1.0 - m.y()}) <= 1e-9;
    if (!on_square) throw Error("voronoi: merged cells do not form a conforming partition");
  }
  return mesh;
}

Mesh generate_voronoi_polygonal(int n_seeds, int n_lloyd, std::uint64_t rng_seed) {
  if (n_seeds < 4) throw ValidationError("voronoi: n_seeds must be >= 4");
  if (n_lloyd < 0) throw ValidationError("voronoi: n_lloyd must be >= 0");
  std::mt19937_64 rng(rng_seed);
  // Explicit 53-bit conversion: std::uniform_real_distribution is not portable bit-for-bit.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point> seeds(n_seeds);
  for (auto& s : seeds) {
    const double x = uniform();
    const double y = uniform();
    s = Point(x, y);
  }
  for (int sweep = 0; sweep < n_lloyd; ++sweep) {
    const auto polys = voronoi_polygons(seeds);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = polygon_centroid(polys[i]);
  }
  return voronoi_from_seeds(seeds);
}

Mesh classify_boundary(const Mesh& mesh, const std::function<bool(const Point&)>& is_neumann) {
  Mesh out = mesh.with_boundary_kinds(
      [&](const Face& f) { return is_neumann(f.midpoint) ? FaceKind::neumann : FaceKind::dirichlet; });
  if (out.count_faces(FaceKind::dirichlet) == 0)
    throw ValidationError("empty Dirichlet boundary: Γ_D is assumed to be non-empty");
  return out;
}

std::function<bool(const Point&)> parse_boundary_rule(const std::string& rule) {
  if (rule == "none" || rule == "never" || rule.empty()) return [](const Point&) { return false; };
  if (rule == "all" || rule == "always") return [](const Point&) { return true; };
  static const std::regex pattern(R"(\s*([xy])\s*==\s*([-+0-9.eE]+)\s*)");
  std::smatch match;
  if (!std::regex_match(rule, match, pattern)) throw ValidationError("unknown boundary rule '" + rule + "'");
  const int axis = match[1] == "x" ? 0 : 1;
  const double value = std::stod(match[2]);
  return [axis, value](const Point& p) { return std::abs(p[axis] - value) <= 1e-12; };
}

QualityReport quality_metrics(const Mesh& mesh) {
  QualityReport report;
  report.min_face_to_inradius = std::numeric_limits<double>::infinity();
  report.cells.reserve(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& g = mesh.geometry(k);
    CellQuality q;
    q.diameter = g.diameter;
    q.inradius = g.inradius;
    q.aspect = g.diameter / g.inradius;
    q.min_face_to_inradius = std::numeric_limits<double>::infinity();
    for (int f : mesh.cell_faces(k)) q.min_face_to_inradius = std::min(q.min_face_to_inradius, mesh.face(f).length / g.inradius);
    report.max_aspect = std::max(report.max_aspect, q.aspect);
    report.min_face_to_inradius = std::min(report.min_face_to_inradius, q.min_face_to_inradius);
    report.cells.push_back(q);
  }
  return report;
}

std::string mesh_to_json_string(const Mesh& mesh) {
  nlohmann::json j;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices()) verts.push_back({v.x(), v.y()});
  j["cells"] = mesh.cells();
  auto neumann = nlohmann::json::array();
  for (const auto& f : mesh.faces())
    if (f.kind == FaceKind::neumann) neumann.push_back({f.vertices[0], f.vertices[1]});
  j["boundary"] = {{"neumann_faces", neumann}};
  j["nominal_h"] = mesh.nominal_h();
  return j.dump();
}

Mesh mesh_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mesh json: ") + e.what());
  }
  if (!j.contains("vertices") || !j.contains("cells")) throw ValidationError("mesh json: need 'vertices' and 'cells'");
  std::vector<Point> vertices;
  std::vector<std::vector<int>> cells;
  try {
    for (const auto& v : j["vertices"]) vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    cells = j["cells"].get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mesh json: ") + e.what());
  }
  const double nominal = j.value("nominal_h", 0.0);
  Mesh mesh(std::move(vertices), std::move(cells), nominal);
  if (!j.contains("boundary")) return mesh;
  const auto& b = j["boundary"];
  if (b.contains("neumann_rule")) {
    const auto rule = parse_boundary_rule(b["neumann_rule"].get<std::string>());
    return mesh.with_boundary_kinds(
        [&](const Face& f) { return rule(f.midpoint) ? FaceKind::neumann : FaceKind::dirichlet; });
  }
  if (b.contains("neumann_faces")) {
    std::unordered_map<std::uint64_t, bool> listed;
    for (const auto& e : b["neumann_faces"]) listed[edge_key(e.at(0).get<int>(), e.at(1).get<int>())] = true;
    std::size_t matched = 0;
    Mesh out = mesh.with_boundary_kinds([&](const Face& f) {
      if (listed.count(edge_key(f.vertices[0], f.vertices[1]))) {
        ++matched;
        return FaceKind::neumann;
      }
      return FaceKind::dirichlet;
    });
    if (matched != listed.size()) throw ValidationError("mesh json: neumann_faces lists an edge that is not a boundary face");
    return out;
  }
  return mesh;
}

Mesh read_mesh_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return mesh_from_json_string(buffer.str());
}

void write_mesh_json(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  out << mesh_to_json_string(mesh) << '\n';
  if (!out) throw IoError("failed writing mesh file '" + path + "'");
}

}  // namespace dlsfem
