#ifndef DGRELAX_RECONSTRUCTION_HPP_
#define DGRELAX_RECONSTRUCTION_HPP_

#include "dgrelax/dg_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dgrelax {

/// Groups the (element, local node) pairs of a space by geometric
/// coincidence of their physical positions.
template <int N>
class NodeSharing {
public:
  explicit NodeSharing(const DGSpace<N>& space, double tol = 1e-10) {
    const int nb = space.nodes_per_element();
    const std::size_t n = space.num_elements() * nb;
    std::vector<Vec2> pos;
    pos.reserve(n);
    for (std::size_t k = 0; k < space.num_elements(); ++k)
      for (const Vec2& x : space.element_nodes(k)) pos.push_back(x);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pos[a].x() < pos[b].x(); });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n && pos[order[j]].x() - pos[order[i]].x() <= tol; ++j)
        if (std::abs(pos[order[j]].y() - pos[order[i]].y()) <= tol) parent[find(order[j])] = find(order[i]);

    group_of_.assign(n, 0);
    std::vector<std::size_t> id(n, n);
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t r = find(a);
      if (id[r] == n) {
        id[r] = groups_.size();
        groups_.emplace_back();
      }
      group_of_[a] = id[r];
      groups_[id[r]].push_back(a);
    }
  }

  /// Members are flat indices k * nodes_per_element + local node.
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  std::size_t group_of(std::size_t flat) const { return group_of_[flat]; }

private:
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> group_of_;
};

/// Conforming w_h in the same space: every geometric Lagrange node gets the
/// arithmetic mean of the incident elements' nodal values.
template <int N>
DGField<N> reconstruct_continuous(const DGField<N>& field) {
  const auto& space = field.space();
  NodeSharing<N> sharing(space);
  DGField<N> out(field.space_ptr());
  for (const auto& g : sharing.groups()) {
    VecN<N> mean = VecN<N>::Zero();
    for (std::size_t flat : g) mean += field.coefficients().template segment<N>(flat * N);
    mean /= static_cast<double>(g.size());
    for (std::size_t flat : g) out.coefficients().template segment<N>(flat * N) = mean;
  }
  return out;
}

/// Constant C(n, r) with sum_i |c_i - mean|^r <= C sum_i |c_{i+1} - c_i|^r.
///
/// Jensen gives sum_j |c_j - m|^r <= (2/n) sum_{j<i} |c_i - c_j|^r, and
/// |c_i - c_j|^r <= (i-j)^{r-1} sum_{k=j}^{i-1} |c_{k+1} - c_k|^r, so C is
/// (2/n) times the largest total weight any consecutive difference collects.
inline double mean_deviation_constant(int n, double r) {
  if (n < 2 || r < 1.0) throw std::invalid_argument("mean_deviation_constant: need n >= 2 and r >= 1");
  double worst = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    double w = 0.0;
    for (int j = 0; j <= k; ++j)
      for (int i = k + 1; i < n; ++i) w += std::pow(static_cast<double>(i - j), r - 1.0);
    worst = std::max(worst, w);
  }
  return 2.0 / n * worst;
}

} // namespace dgrelax

#endif
