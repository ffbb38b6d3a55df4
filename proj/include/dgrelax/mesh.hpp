#ifndef DGRELAX_MESH_HPP_
#define DGRELAX_MESH_HPP_

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dgrelax {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct BoundingBox {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool degenerate() const {
    return !(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1)) ||
           width() <= 0.0 || height() <= 0.0;
  }
};

inline constexpr BoundingBox unit_square{0.0, 0.0, 1.0, 1.0};

struct Edge {
  std::array<int, 2> vertices{};
  int plus = -1;              // triangle with the smaller index
  std::optional<int> minus;   // absent on the boundary
  Vec2 normal = Vec2::Zero(); // unit, outward from the plus triangle
  double length = 0.0;

  bool is_boundary() const { return !minus.has_value(); }
  bool is_internal() const { return minus.has_value(); }
};

/// Conforming triangulation with edge incidence.
///
/// Triangles are counterclockwise. Local edge i of a triangle joins its local
/// vertices i and (i+1)%3, so `triangle_to_edges[k][i]` is that edge.
/// Immutable after construction; concurrent reads are safe.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_to_edges;
  BoundingBox domain_bbox;

  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_edges() const { return edges.size(); }

  double signed_area(std::size_t k) const {
    const auto& t = triangles[k];
    const Vec2 a = vertices[t[1]] - vertices[t[0]];
    const Vec2 b = vertices[t[2]] - vertices[t[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }
  double area(std::size_t k) const { return std::abs(signed_area(k)); }

  Vec2 centroid(std::size_t k) const {
    const auto& t = triangles[k];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
  }

  Vec2 edge_point(std::size_t e, double t) const {
    const auto& v = edges[e].vertices;
    return (1.0 - t) * vertices[v[0]] + t * vertices[v[1]];
  }
};

namespace detail {

/// Fills edges and triangle_to_edges from triangles. Plus side is the
/// lower-indexed triangle, the canonical normal is its outward normal.
inline void build_edges(Mesh& mesh) {
  std::map<std::pair<int, int>, int> lookup;
  mesh.edges.clear();
  mesh.triangle_to_edges.assign(mesh.triangles.size(), {-1, -1, -1});
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(mesh.edges.size()));
      if (inserted) {
        Edge e;
        e.vertices = {a, b};
        e.plus = static_cast<int>(k);
        const Vec2 d = mesh.vertices[b] - mesh.vertices[a];
        e.length = d.norm();
        // counterclockwise triangle: outward normal is the tangent rotated clockwise
        e.normal = Vec2(d.y(), -d.x()) / e.length;
        mesh.edges.push_back(e);
      } else {
        Edge& e = mesh.edges[it->second];
        if (e.minus) throw std::invalid_argument("build_edges: edge shared by more than two triangles");
        e.minus = static_cast<int>(k);
      }
      mesh.triangle_to_edges[k][i] = it->second;
    }
  }
}

} // namespace detail

/// Criss-cross triangulation of `bbox`: nx*ny equal rectangles, each split by
/// its centroid into four triangles (bottom, right, top, left).
inline Mesh build_crisscross_mesh(int nx, int ny, const BoundingBox& bbox = unit_square) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_crisscross_mesh: nx and ny must be positive");
  if (bbox.degenerate()) throw std::invalid_argument("build_crisscross_mesh: degenerate bounding box");

  Mesh mesh;
  mesh.domain_bbox = bbox;
  const double hx = bbox.width() / nx;
  const double hy = bbox.height() / ny;
  const auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };

  mesh.vertices.reserve((nx + 1) * (ny + 1) + nx * ny);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(bbox.x0 + i * hx, bbox.y0 + j * hy);
  const int first_center = static_cast<int>(mesh.vertices.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.vertices.emplace_back(bbox.x0 + (i + 0.5) * hx, bbox.y0 + (j + 0.5) * hy);

  mesh.triangles.reserve(4 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = first_center + j * nx + i;
      const int v00 = grid(i, j), v10 = grid(i + 1, j), v11 = grid(i + 1, j + 1), v01 = grid(i, j + 1);
      mesh.triangles.push_back({v00, v10, c});
      mesh.triangles.push_back({v10, v11, c});
      mesh.triangles.push_back({v11, v01, c});
      mesh.triangles.push_back({v01, v00, c});
    }
  }
  detail::build_edges(mesh);
  return mesh;
}

struct EdgeClassification {
  std::vector<int> internal;
  std::vector<int> boundary;
};

inline EdgeClassification classify_edges(const Mesh& mesh) {
  EdgeClassification out;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    (mesh.edges[e].is_internal() ? out.internal : out.boundary).push_back(static_cast<int>(e));
  return out;
}

/// Debug dump: vertices.csv (id,x,y), triangles.csv (id,v0,v1,v2),
/// edges.csv (id,v0,v1,plus,minus,nx,ny,length,kind) with minus = -1 on the boundary.
inline void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream v(dir / "vertices.csv");
  v << std::setprecision(17) << "id,x,y\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    v << i << ',' << mesh.vertices[i].x() << ',' << mesh.vertices[i].y() << '\n';
  std::ofstream t(dir / "triangles.csv");
  t << "id,v0,v1,v2\n";
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k)
    t << k << ',' << mesh.triangles[k][0] << ',' << mesh.triangles[k][1] << ',' << mesh.triangles[k][2] << '\n';
  std::ofstream e(dir / "edges.csv");
  e << std::setprecision(17) << "id,v0,v1,plus,minus,nx,ny,length,kind\n";
  for (std::size_t i = 0; i < mesh.edges.size(); ++i) {
    const Edge& ed = mesh.edges[i];
    e << i << ',' << ed.vertices[0] << ',' << ed.vertices[1] << ',' << ed.plus << ',' << ed.minus.value_or(-1) << ','
      << ed.normal.x() << ',' << ed.normal.y() << ',' << ed.length << ',' << (ed.is_boundary() ? "boundary" : "internal")
      << '\n';
  }
}

} // namespace dgrelax

#endif
