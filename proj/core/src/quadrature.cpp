#include "sktap/quadrature.hpp"

#include "sktap/types.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

namespace sktap {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kFieldWindow = 20.0;
constexpr double kPanelWidth = 2.0;
constexpr double kSdSpan = 10.0;
constexpr int kLegendrePoints = 20;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

// P(Z <= z)
double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void QuadratureRule::print(std::ostream& os) const {
  auto old = os.precision(17);
  for (std::size_t j = 0; j < nodes.size(); ++j) os << nodes[j] << ' ' << weights[j] << '\n';
  os.precision(old);
}

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 2) throw DomainError("gauss_hermite_rule: order must be >= 2");
  // Newton on orthonormal physicists' Hermite polynomials (weight exp(-x^2)),
  // then x -> sqrt(2) x and w -> w / sqrt(pi).
  const int n = order;
  std::vector<double> x(n), w(n);
  const double pim4 = std::pow(kPi, -0.25);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    int it = 0;
    for (; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (it == 100) throw ConvergenceError("gauss_hermite_rule: Newton on Hermite roots", 0.0, it);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    // ascending order
    rule.nodes[i] = std::sqrt(2.0) * x[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] / std::sqrt(kPi);
    total += rule.weights[i];
  }
  for (double& wi : rule.weights) wi /= total;
  return rule;
}

const QuadratureRule& cached_gauss_hermite(int order) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, std::make_unique<const QuadratureRule>(gauss_hermite_rule(order))).first;
  }
  return *it->second;
}

QuadratureRule gaussian_field_rule(double mean, double sd, int gh_order) {
  if (!(sd >= 0.0) || !std::isfinite(mean)) throw DomainError("gaussian_field_rule: invalid mean/sd");
  const double lo = std::max(mean - kSdSpan * sd, -kFieldWindow);
  const double hi = std::min(mean + kSdSpan * sd, kFieldWindow);
  if (sd <= 1.0 || hi - lo <= kPanelWidth) return cached_gauss_hermite(gh_order);

  using GL = boost::math::quadrature::gauss<double, kLegendrePoints>;
  // boost stores the nonnegative half of the symmetric rule
  std::vector<double> gx, gw;
  {
    const auto& a = GL::abscissa();
    const auto& wt = GL::weights();
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j] == 0.0) {
        gx.push_back(0.0);
        gw.push_back(wt[j]);
        continue;
      }
      gx.push_back(a[j]);
      gw.push_back(wt[j]);
      gx.push_back(-a[j]);
      gw.push_back(wt[j]);
    }
  }

  QuadratureRule rule;
  const int panels = static_cast<int>(std::ceil((hi - lo) / kPanelWidth));
  const double width = (hi - lo) / panels;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * gx.size() + 2);
  rule.weights.reserve(rule.nodes.capacity());

  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  const double left_mass = normal_cdf(a);
  const double right_mass = normal_cdf(-b);
  if (left_mass > 0.0) {
    rule.nodes.push_back(-normal_pdf(a) / left_mass);
    rule.weights.push_back(left_mass);
  }
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * width;
    for (std::size_t j = 0; j < gx.size(); ++j) {
      const double y = c + 0.5 * width * gx[j];
      const double zz = (y - mean) / sd;
      rule.nodes.push_back(zz);
      rule.weights.push_back(0.5 * width * gw[j] * normal_pdf(zz) / sd);
    }
  }
  if (right_mass > 0.0) {
    rule.nodes.push_back(normal_pdf(b) / right_mass);
    rule.weights.push_back(right_mass);
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace sktap
