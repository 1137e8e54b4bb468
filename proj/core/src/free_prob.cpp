#include "sktap/free_prob.hpp"

#include "sktap/tap_functional.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sktap {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kEdgeLo = 1e-9;
constexpr double kEdgeHi = 1e3;
constexpr double kEdgeTol = 1e-12;
constexpr double kRegimeTol = 1e-10;
constexpr double kOutlierDerivativeTol = 1e-10;
constexpr int kMaxSubordinationIterations = 100000;

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

struct LegendreRule {
  std::vector<double> x, w;
};

const LegendreRule& legendre20() {
  static const LegendreRule rule = [] {
    using GL = boost::math::quadrature::gauss<double, 20>;
    LegendreRule r;
    const auto& a = GL::abscissa();
    const auto& wt = GL::weights();
    for (std::size_t j = 0; j < a.size(); ++j) {
      r.x.push_back(a[j]);
      r.w.push_back(wt[j]);
      if (a[j] != 0.0) {
        r.x.push_back(-a[j]);
        r.w.push_back(wt[j]);
      }
    }
    return r;
  }();
  return rule;
}

// Shift by i pi k so that the imaginary part lies in [-pi/2, pi/2].
Complex reduce_pole(Complex p) {
  const double k = std::round(p.imag() / kPi);
  return {p.real(), p.imag() - kPi * k};
}

// g_nu(w) = int phi_s(y - h) / (w + cosh^2 y) dy for Im w > 0. Poles of the
// integrand within distance min(1, s) of the real axis are subtracted and
// integrated in closed form; the smooth remainder uses composite Gauss-Legendre.
Complex g_nu_upper(const NuMeasure& nu, Complex w) {
  const double h = nu.params.h;
  const double s = nu.sd;
  if (s == 0.0) {
    const double c = std::cosh(h);
    return 1.0 / (w + c * c);
  }
  const double a = std::max(h - 12.0 * s, -25.0);
  const double b = std::min(h + 12.0 * s, 25.0);
  if (!(b - a > 1e-12)) {
    // all Gaussian mass far outside |y| <= 25: the integrand is flat there
    Complex acc = 0.0;
    for (std::size_t j = 0; j < nu.rule.size(); ++j) {
      const double c = std::cosh(h + s * nu.rule.nodes[j]);
      acc += nu.rule.weights[j] / (w + c * c);
    }
    return acc;
  }

  const double norm = 1.0 / (s * std::sqrt(2.0 * kPi));
  auto pdf = [&](Complex y) { return norm * std::exp(-(y - h) * (y - h) / (2.0 * s * s)); };

  std::array<Complex, 2> poles{};
  std::array<Complex, 2> residues{};
  int npoles = 0;
  {
    const Complex y1 = std::acosh(std::sqrt(-w));
    const std::array<Complex, 2> cand{reduce_pole(y1), reduce_pole(-y1)};
    const double reach = std::min(1.0, s);
    for (const Complex& p : cand) {
      if (std::abs(p.imag()) >= reach) continue;
      if (p.real() < a - 1.0 || p.real() > b + 1.0) continue;
      bool dup = false;
      for (int i = 0; i < npoles; ++i) dup = dup || std::abs(poles[i] - p) < 1e-300;
      if (dup) continue;
      poles[npoles] = p;
      residues[npoles] = pdf(p) / std::sinh(2.0 * p);
      ++npoles;
    }
  }

  const LegendreRule& gl = legendre20();
  const double width_target = std::min(2.0, s);
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width_target)));
  const double width = (b - a) / panels;
  Complex acc = 0.0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double c = a + (pnl + 0.5) * width;
    Complex part = 0.0;
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      const double y = c + 0.5 * width * gl.x[j];
      const double ch = std::cosh(y);
      Complex f = pdf(Complex(y, 0.0)) / (w + ch * ch);
      for (int i = 0; i < npoles; ++i) f -= residues[i] / (y - poles[i]);
      part += gl.w[j] * f;
    }
    acc += 0.5 * width * part;
  }
  for (int i = 0; i < npoles; ++i) {
    acc += residues[i] * (std::log(Complex(b, 0.0) - poles[i]) - std::log(Complex(a, 0.0) - poles[i]));
  }
  return acc;
}

Complex g_nu_any(const NuMeasure& nu, Complex w) {
  if (nu.point_location) return 1.0 / (w - *nu.point_location);
  if (w.imag() > 0.0) return g_nu_upper(nu, w);
  if (w.imag() < 0.0) return std::conj(g_nu_upper(nu, std::conj(w)));
  return nu.inverse_moment(w.real(), 1);
}

double bisect_decreasing(const auto& f, double lo, double hi, double target, double tol) {
  // f decreasing on [lo, hi] with f(lo) > target >= f(hi)
  for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

NuMeasure NuMeasure::from_rs(const ModelParams& p, double q) {
  p.validate();
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("NuMeasure: q must lie in [0,1)");
  NuMeasure nu;
  nu.params = p;
  nu.q = q;
  nu.sd = p.beta * std::sqrt(q);
  nu.rule = gaussian_field_rule(p.h, nu.sd);
  nu.sigma = p.beta;
  return nu;
}

NuMeasure NuMeasure::point_mass(double location, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("NuMeasure::point_mass: sigma must be positive");
  NuMeasure nu;
  nu.params = ModelParams{sigma, 1.0};
  nu.q = 1.0;
  nu.sigma = sigma;
  nu.point_location = location;
  return nu;
}

double NuMeasure::hessian_shift() const {
  if (point_location) return 0.0;
  return params.beta * params.beta * (1.0 - q);
}

double NuMeasure::support_max() const { return point_location ? *point_location : -1.0; }

double NuMeasure::inverse_moment(double u, int power) const {
  if (!(u > support_max())) throw DomainError("NuMeasure: u must exceed sup supp nu");
  if (power < 1) throw DomainError("NuMeasure: power must be >= 1");
  if (point_location) return std::pow(1.0 / (u - *point_location), power);
  const double h = params.h;
  const double s = sd;
  return rule.expect([&](double z) {
    const double c = std::cosh(h + s * z);
    double r;
    if (u == 0.0) {
      const double inv = 1.0 / c;
      r = inv * inv;
    } else {
      r = 1.0 / (u + c * c);
    }
    double out = r;
    for (int k = 1; k < power; ++k) out *= r;
    return out;
  });
}

double NuMeasure::cdf(double x) const {
  if (point_location) return x >= *point_location ? 1.0 : 0.0;
  if (x >= -1.0) return 1.0;
  const double a = std::acosh(std::sqrt(-x));
  const double h = params.h;
  if (sd == 0.0) return std::abs(h) >= a ? 1.0 : 0.0;
  return normal_cdf((h - a) / sd) + normal_cdf((-a - h) / sd);
}

Complex stieltjes_nu(Complex z, const NuMeasure& nu) {
  if (z.imag() == 0.0 && !(z.real() > nu.support_max())) {
    throw DomainError("stieltjes_nu: z lies on the support of nu");
  }
  return g_nu_any(nu, z);
}

Complex semicircle_stieltjes(Complex z, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("semicircle_stieltjes: sigma must be positive");
  const Complex r = std::sqrt(z - 2.0 * sigma) * std::sqrt(z + 2.0 * sigma);
  // (z - r) / (2 sigma^2) rewritten to avoid cancellation at large |z|
  return 2.0 / (z + r);
}

double FreeConvPoint::density() const { return -g.imag() / kPi; }

FreeConvPoint free_conv_stieltjes(double x, double eta, const NuMeasure& nu, double shift,
                                  std::optional<Complex> warm_start) {
  if (!(eta > 0.0)) throw DomainError("free_conv_stieltjes: eta must be positive");
  const double s2 = nu.sigma * nu.sigma;
  const Complex zp(x + shift, eta);

  Complex w;
  if (warm_start && warm_start->imag() > 0.0) {
    w = *warm_start;
  } else {
    const double center = nu.point_location ? *nu.point_location : -std::pow(std::cosh(nu.params.h), 2);
    w = zp - s2 * semicircle_stieltjes(zp - center, nu.sigma);
    if (!(w.imag() > 0.0)) w = Complex(w.real(), eta);
  }

  const double scale = std::max(1.0, std::abs(zp));
  Complex g = g_nu_any(nu, w);
  Complex F = w + s2 * g - zp;
  int it = 0;
  for (; it < kMaxSubordinationIterations; ++it) {
    if (std::abs(F) <= 1e-12 * scale) break;
    const double delta = 1e-4 * std::min(w.imag(), 1.0);
    const Complex dg = (g_nu_any(nu, w + delta) - g_nu_any(nu, w - delta)) / (2.0 * delta);
    const Complex wn = w - F / (1.0 + s2 * dg);
    bool accepted = false;
    if (wn.imag() > 0.0 && std::isfinite(wn.real()) && std::isfinite(wn.imag())) {
      const Complex gn = g_nu_any(nu, wn);
      const Complex Fn = wn + s2 * gn - zp;
      if (std::abs(Fn) < std::abs(F)) {
        w = wn;
        g = gn;
        F = Fn;
        accepted = true;
      }
    }
    if (!accepted) {
      w = 0.5 * w + 0.5 * (zp - s2 * g);
      g = g_nu_any(nu, w);
      F = w + s2 * g - zp;
    }
  }
  if (it == kMaxSubordinationIterations) {
    throw ConvergenceError("free_conv_stieltjes: subordination did not converge", std::abs(F), it);
  }
  return {g, w, it};
}

HValue subordination_H(double u, const NuMeasure& nu) {
  if (!(u > nu.support_max())) throw DomainError("subordination_H: u must exceed sup supp nu");
  const double s2 = nu.sigma * nu.sigma;
  return {u + s2 * nu.inverse_moment(u, 1), 1.0 - s2 * nu.inverse_moment(u, 2)};
}

const char* to_string(AtRegime r) {
  switch (r) {
    case AtRegime::strict_AT: return "strict_AT";
    case AtRegime::on_AT_line: return "on_AT_line";
    case AtRegime::beyond_AT: return "beyond_AT";
  }
  return "unknown";
}

EdgeReport support_edge(const NuMeasure& nu) {
  double lo = nu.support_max() + kEdgeLo;
  double hi = nu.support_max() + 1.0 + kEdgeHi;
  auto dH = [&](double u) { return subordination_H(u, nu).derivative; };
  if (!(dH(hi) > 0.0)) throw NumericalError("support_edge: H' is not positive far from the support");
  // When nu puts almost no mass near its top, the zero of H' sits within kEdgeLo of
  // sup supp nu and the quadrature cannot see it; the edge is then H at the boundary.
  if (!(dH(lo) < 0.0)) hi = lo;
  int it = 0;
  while (hi - lo > kEdgeTol && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (dH(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  EdgeReport rep;
  rep.u_star = 0.5 * (lo + hi);
  rep.d = subordination_H(rep.u_star, nu).value;
  rep.shifted_edge = rep.d - nu.hessian_shift();
  if (nu.support_max() < 0.0) {
    const double d0 = dH(0.0);
    rep.at_regime = d0 > kRegimeTol ? AtRegime::strict_AT
                    : d0 < -kRegimeTol ? AtRegime::beyond_AT
                                       : AtRegime::on_AT_line;
  } else {
    rep.at_regime = AtRegime::beyond_AT;
  }
  return rep;
}

OutlierReport outlier_prediction(double theta, const NuMeasure& nu) {
  if (!(theta > nu.support_max())) throw DomainError("outlier_prediction: theta must exceed sup supp nu");
  const HValue hv = subordination_H(theta, nu);
  OutlierReport rep;
  rep.theta = theta;
  rep.in_O = hv.derivative > kOutlierDerivativeTol;
  rep.predicted_lambda1 = rep.in_O ? hv.value : support_edge(nu).d;
  return rep;
}

ShermanMorrisonRoot sherman_morrison_top_eig(const Magnetization& m, const ModelParams& p) {
  const Index n = m.size();
  if (n == 0) throw DomainError("sherman_morrison_top_eig: empty magnetization");
  const double dn = static_cast<double>(n);
  std::vector<double> c(n), w(n);
  double cmin = INFINITY, wsum = 0.0;
  for (Index i = 0; i < n; ++i) {
    c[i] = m.inv_one_minus_sq(i);
    const double x = m.values()[i];
    w[i] = 2.0 * p.beta * p.beta * x * x / dn;
    cmin = std::min(cmin, c[i]);
    wsum += w[i];
  }
  auto f = [&](double u) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += w[i] / (u + c[i]);
    return acc;
  };
  const double lo = -cmin;
  const double lo_probe = std::nextafter(lo, INFINITY);
  if (!(f(lo_probe) > 1.0)) {
    throw NumericalError("sherman_morrison_top_eig: no root above -min 1/(1-m_i^2)");
  }
  ShermanMorrisonRoot out;
  const double f0 = f(0.0);
  if (f0 > 1.0) {
    out.exists_positive = true;
    // f(u) <= sum w / (u + 1) <= 1 once u >= sum w
    out.u_n = bisect_decreasing(f, 0.0, std::max(wsum, 1e-300), 1.0, 1e-16);
  } else {
    out.u_n = bisect_decreasing(f, lo, 0.0, 1.0, 1e-16);
  }
  return out;
}

PopulationRoot population_u_infinity(const NuMeasure& nu) {
  if (nu.point_location) throw DomainError("population_u_infinity: requires a Gaussian nu");
  const double b2 = nu.params.beta * nu.params.beta;
  const double h = nu.params.h;
  const double s = nu.sd;
  auto f = [&](double u) {
    return 2.0 * b2 * nu.rule.expect([&](double z) {
      const double y = h + s * z;
      const double t = std::tanh(y);
      const double sh = std::sinh(y);
      // u + cosh^2 = (u + 1) + sinh^2
      return t * t / ((u + 1.0) + sh * sh);
    });
  };
  PopulationRoot out;
  const double lo = -1.0 + 1e-12;
  if (!(f(lo) > 1.0)) return out;
  const double hi = std::max(2.0 * b2 * nu.q, 0.0) + 1.0;
  out.u = bisect_decreasing(f, lo, hi, 1.0, 1e-16);
  out.found = true;
  return out;
}

double independent_lambda1_prediction(const NuMeasure& nu) {
  const PopulationRoot r = population_u_infinity(nu);
  const double theta = r.found ? std::max(r.u, -1.0 + kEdgeLo) : -1.0 + kEdgeLo;
  return outlier_prediction(theta, nu).predicted_lambda1 - nu.hessian_shift();
}

FreeConvolutionCdf::FreeConvolutionCdf(const NuMeasure& nu, double shift, int points, double eta)
    : nu_(nu), shift_(shift) {
  if (points < 16) throw DomainError("FreeConvolutionCdf: need at least 16 grid points");
  const EdgeReport er = support_edge(nu_);
  edge_ = er.d - shift_;

  const double sigma = nu_.sigma;
  if (nu_.point_location) {
    lower_ = *nu_.point_location - shift_ - 2.0 * sigma - 1e-3;
  } else {
    // nu quantile at 1e-6, widened by the semicircle radius
    const double target = 1e-6;
    const double h = nu_.params.h;
    const double s = std::max(nu_.sd, 1e-300);
    auto tail = [&](double a) { return normal_cdf((h - a) / s) + normal_cdf((-a - h) / s); };
    double alo = 0.0, ahi = std::abs(h) + 40.0 * s + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (alo + ahi);
      if (tail(mid) > target) {
        alo = mid;
      } else {
        ahi = mid;
      }
    }
    const double a = std::min(ahi, 300.0);
    const double ch = std::cosh(a);
    lower_ = -ch * ch - shift_ - 2.0 * sigma;
  }
  lower_ = std::min(lower_, edge_ - 1e-6);

  const double T = std::sqrt(edge_ - lower_);
  const double scale = 0.25 * std::min(1.0, std::sqrt(sigma));
  const double U = std::asinh(T / scale);
  const int M = points;
  ts_.resize(M);
  tail_.assign(M, 0.0);
  xs_.resize(M);
  dens_.resize(M);
  std::optional<Complex> warm = Complex(er.u_star, 1e-3);
  for (int j = 0; j < M; ++j) {
    const double u = U * j / (M - 1);
    const double t = scale * std::sinh(u);
    ts_[j] = t;
    xs_[j] = edge_ - t * t;
    const FreeConvPoint pt = free_conv_stieltjes(xs_[j], eta, nu_, shift_, warm);
    warm = pt.omega;
    dens_[j] = std::max(0.0, pt.density());
  }
  for (int j = 1; j < M; ++j) {
    const double fa = dens_[j - 1] * 2.0 * ts_[j - 1];
    const double fb = dens_[j] * 2.0 * ts_[j];
    tail_[j] = tail_[j - 1] + 0.5 * (fa + fb) * (ts_[j] - ts_[j - 1]);
  }
  const double below = nu_.cdf(lower_ + shift_);
  total_mass_ = tail_.back() + below;
  // rescale the integrated tail so the curve meets the far-left piece continuously
  tail_scale_ = tail_.back() > 0.0 ? (1.0 - below) / tail_.back() : 1.0;
}

double FreeConvolutionCdf::operator()(double x) const {
  if (x >= edge_) return 1.0;
  if (x < lower_) return nu_.cdf(x + shift_);
  const double t = std::sqrt(edge_ - x);
  const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  if (it == ts_.end()) return 1.0 - tail_scale_ * tail_.back();
  const std::size_t j = static_cast<std::size_t>(it - ts_.begin());
  if (j == 0) return 1.0;
  const double f = (t - ts_[j - 1]) / (ts_[j] - ts_[j - 1]);
  return 1.0 - tail_scale_ * (tail_[j - 1] + f * (tail_[j] - tail_[j - 1]));
}

}  // namespace sktap
