#ifndef DGRELAX_FIELDS_HPP_
#define DGRELAX_FIELDS_HPP_

#include "dgrelax/dg_space.hpp"
#include "dgrelax/quadrature.hpp"
#include "dgrelax/report.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dgrelax {

/// Per-triangle quantities of a deformation y_h, gradients taken at the centroid
/// (exact for q = 1, where they are element constants).
struct TriangleFields {
  int element = 0;
  Vec2 centroid = Vec2::Zero();
  Vec2 deformed_centroid = Vec2::Zero();
  double det = 0.0;
  double inv_det = 0.0; // 0 when det = 0
  double lambda_max = 0.0; // largest singular value of grad y
  double lambda_min = 0.0;
  double energy = 0.0; // int_K W(grad y)
};

using DensityFn = std::function<double(const Mat2&)>;

inline std::vector<TriangleFields> triangle_fields(const DGField<2>& y, const DensityFn& W, int degree = 1) {
  const auto& space = y.space();
  const auto rule = quadrature_triangle(std::max(degree, 1));
  const Vec2 c(1.0 / 3.0, 1.0 / 3.0);
  std::vector<TriangleFields> out;
  out.reserve(space.num_elements());
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    TriangleFields t;
    t.element = static_cast<int>(k);
    t.centroid = space.to_physical(k, c);
    t.deformed_centroid = y.value(k, c);
    const Mat2 F = y.gradient(k, c);
    t.det = F.determinant();
    t.inv_det = t.det != 0.0 ? 1.0 / t.det : 0.0;
    Eigen::JacobiSVD<Mat2> svd(F);
    t.lambda_max = svd.singularValues()[0];
    t.lambda_min = svd.singularValues()[1];
    if (W) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * W(y.gradient(k, rule.points[i]));
      t.energy = 2.0 * space.area(k) * s;
    }
    out.push_back(t);
  }
  return out;
}

inline void write_fields_csv(const std::vector<TriangleFields>& fields, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  using detail::format_double;
  os << "element,x,y,deformed_x,deformed_y,det,inv_det,lambda_max,lambda_min,energy\n";
  for (const auto& t : fields)
    os << t.element << ',' << format_double(t.centroid.x()) << ',' << format_double(t.centroid.y()) << ','
       << format_double(t.deformed_centroid.x()) << ',' << format_double(t.deformed_centroid.y()) << ','
       << format_double(t.det) << ',' << format_double(t.inv_det) << ',' << format_double(t.lambda_max) << ','
       << format_double(t.lambda_min) << ',' << format_double(t.energy) << '\n';
}

/// Element containing x (closed triangles, first match), or nullopt.
inline std::optional<std::size_t> locate(const DGSpace<2>& space, const Vec2& x, double tol = 1e-12) {
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    const Vec2 xi = space.to_reference(k, x);
    if (xi.x() >= -tol && xi.y() >= -tol && xi.x() + xi.y() <= 1.0 + tol) return k;
  }
  return std::nullopt;
}

struct ProfileSample {
  double s = 0.0; // arc-length parameter in [0, 1]
  Vec2 x = Vec2::Zero();
  double displacement = 0.0; // |y_h(x) - x|
  double error = 0.0;        // |y_h(x) - y0(x)|
};

/// Samples along the segment a -> b (the domain diagonal in the experiments).
inline std::vector<ProfileSample> line_profile(const DGField<2>& y, const Vec2& a, const Vec2& b, int samples,
                                               const std::function<Vec2(const Vec2&)>& y0 = {}) {
  if (samples < 2) throw std::invalid_argument("line_profile: need at least 2 samples");
  std::vector<ProfileSample> out;
  for (int i = 0; i < samples; ++i) {
    ProfileSample p;
    p.s = static_cast<double>(i) / (samples - 1);
    p.x = a + p.s * (b - a);
    const auto k = locate(y.space(), p.x);
    if (!k) throw std::runtime_error("line_profile: sample outside the mesh");
    const Vec2 v = y.value_at(*k, p.x);
    p.displacement = (v - p.x).norm();
    p.error = y0 ? (v - y0(p.x)).norm() : 0.0;
    out.push_back(p);
  }
  return out;
}

inline void write_profile_csv(const std::vector<ProfileSample>& prof, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  using detail::format_double;
  os << "s,x,y,displacement,error\n";
  for (const auto& p : prof)
    os << format_double(p.s) << ',' << format_double(p.x.x()) << ',' << format_double(p.x.y()) << ','
       << format_double(p.displacement) << ',' << format_double(p.error) << '\n';
}

/// Legacy ASCII VTK with one triangle cell per element. With `deformed`,
/// each element's corners are placed at y_h of that element (so the broken
/// field may show gaps); otherwise the reference mesh is written.
inline void write_fields_vtk(const DGField<2>& y, const std::vector<TriangleFields>& fields,
                             const std::filesystem::path& file, bool deformed = false) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  const auto& space = y.space();
  const std::size_t nt = space.num_elements();
  os.precision(17);
  os << "# vtk DataFile Version 3.0\ndgrelax fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << 3 * nt << " double\n";
  const Vec2 corners[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (std::size_t k = 0; k < nt; ++k)
    for (const Vec2& c : corners) {
      const Vec2 p = deformed ? Vec2(y.value(k, c)) : space.to_physical(k, c);
      os << p.x() << ' ' << p.y() << " 0\n";
    }
  os << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (std::size_t k = 0; k < nt; ++k) os << "3 " << 3 * k << ' ' << 3 * k + 1 << ' ' << 3 * k + 2 << '\n';
  os << "CELL_TYPES " << nt << '\n';
  for (std::size_t k = 0; k < nt; ++k) os << "5\n";
  os << "CELL_DATA " << nt << '\n';
  const auto scalar = [&](const char* name, auto get) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const auto& t : fields) os << get(t) << '\n';
  };
  scalar("inv_det", [](const TriangleFields& t) { return t.inv_det; });
  scalar("lambda_max", [](const TriangleFields& t) { return t.lambda_max; });
  scalar("lambda_min", [](const TriangleFields& t) { return t.lambda_min; });
  scalar("energy", [](const TriangleFields& t) { return t.energy; });
}

} // namespace dgrelax

#endif
