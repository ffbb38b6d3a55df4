#ifndef DGRELAX_TEST_SUPPORT_HPP_
#define DGRELAX_TEST_SUPPORT_HPP_

#include "dgrelax/dg_space.hpp"

#include <Eigen/Dense>

#include <memory>
#include <random>

namespace dgrelax::testing {

inline std::shared_ptr<const Mesh> crisscross(int nx, int ny, const BoundingBox& box = unit_square) {
  return std::make_shared<const Mesh>(build_crisscross_mesh(nx, ny, box));
}

template <int N = 2>
std::shared_ptr<const DGSpace<N>> space(int nx, int ny, int q = 1) {
  return make_space<N>(crisscross(nx, ny), q);
}

inline Eigen::VectorXd random_vector(std::size_t n, std::mt19937_64& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline Mat2 random_matrix(std::mt19937_64& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Mat2 m;
  m << u(rng), u(rng), u(rng), u(rng);
  return m;
}

template <int N>
DGField<N> random_field(const std::shared_ptr<const DGSpace<N>>& s, std::mt19937_64& rng, double amplitude = 1.0) {
  return DGField<N>(s, random_vector(s->total_dofs(), rng, amplitude));
}

inline const Mat2& compression() {
  static const Mat2 F0 = (Mat2() << 1.0, 0.0, 0.0, 0.9).finished();
  return F0;
}

} // namespace dgrelax::testing

#endif
