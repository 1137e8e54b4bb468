#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace sktap {

// Expectation rule against the standard Gaussian: E f(Z) ~ sum_j w_j f(z_j).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  // Gauss-Hermite order, or 0 for composite rules.
  int order = 0;

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) acc += weights[j] * f(nodes[j]);
    return acc;
  }

  // Two columns "node weight", one line per node.
  void print(std::ostream& os) const;
};

inline constexpr int kDefaultGaussHermiteOrder = 101;
inline constexpr int kPsiGaussHermiteOrder = 41;

// Gauss-Hermite rule normalized to the standard Gaussian; throws DomainError for order < 2.
QuadratureRule gauss_hermite_rule(int order);

// Same rule, computed once per order and shared.
const QuadratureRule& cached_gauss_hermite(int order);

// Rule for E f(mean + sd Z). Nodes are still expressed in the Z variable.
// Plain Gauss-Hermite when sd <= 1; otherwise composite Gauss-Legendre panels
// of width <= 2 in y = mean + sd Z over |y| <= 20 with the two Gaussian tails
// collapsed onto their conditional means.
QuadratureRule gaussian_field_rule(double mean, double sd, int gh_order = kDefaultGaussHermiteOrder);

}  // namespace sktap
