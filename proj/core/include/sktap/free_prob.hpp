#pragma once

#include "sktap/quadrature.hpp"
#include "sktap/rs_core.hpp"
#include "sktap/types.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace sktap {

class Magnetization;

using Complex = std::complex<double>;

// nu = law of -cosh^2(Y), Y ~ N(h, beta^2 q), paired with a semicircle of
// variance sigma^2 = beta^2. point_mass() builds a degenerate nu = delta_c for tests.
struct NuMeasure {
  ModelParams params;
  double q = 0.0;
  QuadratureRule rule;  // for E f(h + sd Z)
  double sd = 0.0;      // beta sqrt(q)
  double sigma = 0.0;   // semicircle scale
  std::optional<double> point_location;

  static NuMeasure from_rs(const ModelParams& p, double q);
  static NuMeasure point_mass(double location, double sigma);

  // beta^2 (1 - q): the shift taking nu to the diagonal law of the Hessian
  double hessian_shift() const;
  // sup supp nu (-1, or the point mass location)
  double support_max() const;
  // E[(u - X)^{-power}] for real u > support_max()
  double inverse_moment(double u, int power) const;
  // P(X <= x)
  double cdf(double x) const;
};

// g_nu(z) = E[1 / (z - X)] = E[1 / (z + cosh^2 Y)]; z real must exceed support_max().
Complex stieltjes_nu(Complex z, const NuMeasure& nu);

Complex semicircle_stieltjes(Complex z, double sigma);

struct FreeConvPoint {
  Complex g;      // Stieltjes transform of mu_sigma (+) (nu - shift) at x + i eta
  Complex omega;  // subordination point: g = g_nu(omega)
  int iterations = 0;
  double density() const;  // -Im g / pi
};

// Solves g = g_nu(z + shift - sigma^2 g) at z = x + i eta. A previous omega
// may be passed to continue along a grid.
FreeConvPoint free_conv_stieltjes(double x, double eta, const NuMeasure& nu, double shift,
                                  std::optional<Complex> warm_start = std::nullopt);

struct HValue {
  double value = 0.0;
  double derivative = 0.0;
};

// H(u) = u + sigma^2 g_nu(u) and H'(u) for real u > support_max().
HValue subordination_H(double u, const NuMeasure& nu);

enum class AtRegime { strict_AT, on_AT_line, beyond_AT };
const char* to_string(AtRegime r);

struct EdgeReport {
  double u_star = 0.0;
  double d = 0.0;
  double shifted_edge = 0.0;
  AtRegime at_regime = AtRegime::strict_AT;
};

EdgeReport support_edge(const NuMeasure& nu);

struct OutlierReport {
  double theta = 0.0;
  bool in_O = false;
  double predicted_lambda1 = 0.0;
};

OutlierReport outlier_prediction(double theta, const NuMeasure& nu);

struct ShermanMorrisonRoot {
  double u_n = 0.0;
  bool exists_positive = false;
};

// Largest root of (2 beta^2 / N) sum m_i^2 / (u + 1/(1 - m_i^2)) = 1.
ShermanMorrisonRoot sherman_morrison_top_eig(const Magnetization& m, const ModelParams& p);

struct PopulationRoot {
  double u = -1.0;
  bool found = false;
};

// Root of 2 beta^2 E[tanh^2 Y / (u + cosh^2 Y)] = 1 on (-1, inf).
PopulationRoot population_u_infinity(const NuMeasure& nu);

// Predicted lambda_1 of H(m) for m independent of the disorder:
// outlier_prediction(u_inf) - beta^2 (1 - q), which is the shifted edge when no outlier exists.
double independent_lambda1_prediction(const NuMeasure& nu);

// CDF of mu_sigma (+) (nu - shift), tabulated on x = edge - t^2 with t on an
// asinh-spaced grid. Below the tabulated range the CDF of nu - shift is used.
class FreeConvolutionCdf {
 public:
  FreeConvolutionCdf(const NuMeasure& nu, double shift, int points = 4000, double eta = 1e-6);

  double operator()(double x) const;
  double edge() const { return edge_; }
  double lower() const { return lower_; }
  // integral of the density over [lower, edge] plus the nu-tail mass below lower
  double total_mass() const { return total_mass_; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& densities() const { return dens_; }

 private:
  NuMeasure nu_;
  double shift_;
  double edge_;
  double lower_;
  double total_mass_;
  double tail_scale_ = 1.0;
  std::vector<double> ts_;    // increasing
  std::vector<double> tail_;  // mass in [edge - t^2, edge]
  std::vector<double> xs_;
  std::vector<double> dens_;
};

}  // namespace sktap
