#pragma once

#include "sktap/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sktap {

struct EigenDecomposition {
  Vector eigenvalues;  // descending
  Matrix eigenvectors; // column i pairs with eigenvalues[i]; empty unless requested
  bool has_vectors() const { return eigenvectors.size() > 0; }
};

// Dense symmetric eigensolver (Householder tridiagonalization + implicit QR).
// Throws DomainError when max |M - M^T| exceeds 1e-12 (relative to max |M_ij| when that is > 1).
EigenDecomposition sym_eigen(const Matrix& m, bool want_vectors = false);

struct TopEigenpair {
  double lambda1 = 0.0;
  Vector v;                // unit l2 norm
  double residual = 0.0;   // ||M v - lambda1 v||_2
  int matvecs = 0;
  bool converged = false;  // false: residual >= tol after the restart budget
};

// Largest eigenpair by restarted Lanczos with full reorthogonalization.
// The Krylov space starts from `start` when given, otherwise from a fixed
// pseudo-random vector, so the result is deterministic.
TopEigenpair top_eigpair(const Matrix& m, double tol = 1e-10, const Vector* start = nullptr,
                         int max_restarts = 60, int krylov_dim = 0);

struct DecoupledTop {
  double lambda1 = 0.0;
  Index excluded = 0;
};

// Largest eigenvalue of the principal submatrix on indices with M_ii > -diag_floor.
// Rows with very negative diagonal are decoupled from the top of the spectrum
// (second-order shift ~ ||coupling||^2 / diag_floor), and dropping them keeps
// the dense solve at a relative accuracy that resolves lambda1.
DecoupledTop top_eigenvalue_decoupled(const Matrix& m, double diag_floor = 1e8);

// Empirical spectral distribution, right-continuous CDF.
class EsdCurve {
 public:
  explicit EsdCurve(const Vector& eigenvalues);
  explicit EsdCurve(std::vector<double> values);

  double cdf(double x) const;         // #{lambda <= x} / n
  double left_limit(double x) const;  // #{lambda < x} / n
  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;  // ascending
};

// sup_x |F_emp(x) - F(x)|, evaluated at both one-sided limits of every jump.
// F(x-) is taken as F(nextafter(x, -inf)).
double ks_distance(const EsdCurve& esd, const std::function<double(double)>& cdf);

// Probability-normalized semicircle on [-2 sigma, 2 sigma].
double semicircle_cdf(double x, double sigma);
double semicircle_density(double x, double sigma);

// N^{-1/2} sum |v_i|
double haar_abs_statistic(const Vector& v);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<long> counts;
};

Histogram histogram(const Vector& values, int bins, double lo, double hi);

// Single column "eigenvalue".
void write_eigenvalues_csv(const Vector& values, std::ostream& os);
// Columns left,right,count.
void write_histogram_csv(const Histogram& hist, std::ostream& os);

}  // namespace sktap
