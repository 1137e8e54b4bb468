#include "sktap/spectra.hpp"

#include "sktap/rng.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace sktap {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

void require_symmetric(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) throw DomainError(std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw DomainError(std::string(who) + ": matrix is not symmetric");
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& m, bool want_vectors) {
  require_symmetric(m, "sym_eigen");
  EigenDecomposition out;
  const Index n = m.rows();
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("sym_eigen: QR iteration failed");
  // Eigen returns ascending order
  out.eigenvalues = es.eigenvalues().reverse();
  if (want_vectors) out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

TopEigenpair top_eigpair(const Matrix& m, double tol, const Vector* start, int max_restarts, int krylov_dim) {
  require_symmetric(m, "top_eigpair");
  if (!(tol > 0.0)) throw DomainError("top_eigpair: tol must be positive");
  const Index n = m.rows();
  TopEigenpair out;
  if (n == 1) {
    out.lambda1 = m(0, 0);
    out.v = Vector::Ones(1);
    out.converged = true;
    return out;
  }
  const Index dim = std::min<Index>(n, krylov_dim > 0 ? krylov_dim : 400);

  Vector v0;
  if (start != nullptr) {
    if (start->size() != n) throw DomainError("top_eigpair: start vector has wrong size");
    v0 = *start;
  } else {
    v0 = RandomStream(0x6a09e667f3bcc908ull, Stream::probe).normal_vector(n);
  }
  if (!(v0.norm() > 0.0)) v0 = Vector::Ones(n);
  v0.normalize();

  Matrix V(n, dim);
  std::vector<double> alpha, beta;
  Vector best = v0;
  double best_theta = -INFINITY;
  double best_res = INFINITY;

  for (int restart = 0; restart <= max_restarts; ++restart) {
    alpha.clear();
    beta.clear();
    V.col(0) = v0;
    Index j = 0;
    for (; j < dim; ++j) {
      Vector w = m * V.col(j);
      ++out.matvecs;
      const double a = V.col(j).dot(w);
      alpha.push_back(a);
      w -= a * V.col(j);
      if (j > 0) w -= beta.back() * V.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coef = V.leftCols(j + 1).transpose() * w;
        w.noalias() -= V.leftCols(j + 1) * coef;
      }
      const double b = w.norm();
      const bool last = (j + 1 == dim);
      const bool breakdown = b < 1e-14 * std::max(1.0, std::abs(a));
      if (last || breakdown || (j + 1) % 8 == 0) {
        const Index k = j + 1;
        Vector d(k), e(std::max<Index>(k - 1, 1));
        for (Index i = 0; i < k; ++i) d[i] = alpha[i];
        for (Index i = 0; i + 1 < k; ++i) e[i] = beta[i];
        Eigen::SelfAdjointEigenSolver<Matrix> ts;
        ts.computeFromTridiagonal(d, e.head(std::max<Index>(k - 1, 0)), Eigen::ComputeEigenvectors);
        const Vector s = ts.eigenvectors().col(k - 1);
        const double estimate = b * std::abs(s[k - 1]);
        if (estimate < 0.5 * tol || last || breakdown) {
          Vector x = V.leftCols(k) * s;
          x.normalize();
          const Vector mx = m * x;
          ++out.matvecs;
          const double theta = x.dot(mx);
          const double res = (mx - theta * x).norm();
          if (theta > best_theta || res < tol) {
            best = x;
            best_theta = theta;
            best_res = res;
          }
          if (res < tol) {
            out.lambda1 = theta;
            out.v = x;
            out.residual = res;
            out.converged = true;
            return out;
          }
          if (last || breakdown) break;
        }
      }
      if (breakdown) break;
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }
    v0 = best;
  }
  out.lambda1 = best_theta;
  out.v = best;
  out.residual = best_res;
  out.converged = false;
  return out;
}

DecoupledTop top_eigenvalue_decoupled(const Matrix& m, double diag_floor) {
  require_symmetric(m, "top_eigenvalue_decoupled");
  std::vector<Index> keep;
  for (Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) > -diag_floor) keep.push_back(i);
  }
  DecoupledTop out;
  out.excluded = m.rows() - static_cast<Index>(keep.size());
  if (keep.empty()) {
    out.lambda1 = m.diagonal().maxCoeff();
    return out;
  }
  const Index k = static_cast<Index>(keep.size());
  Matrix sub(k, k);
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < k; ++r) sub(r, c) = m(keep[r], keep[c]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("top_eigenvalue_decoupled: QR iteration failed");
  out.lambda1 = es.eigenvalues()[k - 1];
  return out;
}

EsdCurve::EsdCurve(const Vector& eigenvalues) : sorted_(eigenvalues.data(), eigenvalues.data() + eigenvalues.size()) {
  std::sort(sorted_.begin(), sorted_.end());
}

EsdCurve::EsdCurve(std::vector<double> values) : sorted_(std::move(values)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EsdCurve::cdf(double x) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EsdCurve::left_limit(double x) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(const EsdCurve& esd, const std::function<double(double)>& cdf) {
  const auto& v = esd.sorted();
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const double x = v[i];
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j + 1) / n;
    d = std::max(d, std::abs(cdf(x) - at));
    d = std::max(d, std::abs(cdf(std::nextafter(x, -INFINITY)) - below));
    i = j + 1;
  }
  return d;
}

double semicircle_cdf(double x, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("semicircle_cdf: sigma must be positive");
  const double r = 2.0 * sigma;
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  const double u = x / r;
  return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / kPi;
}

double semicircle_density(double x, double sigma) {
  const double r2 = 4.0 * sigma * sigma - x * x;
  return r2 <= 0.0 ? 0.0 : std::sqrt(r2) / (2.0 * kPi * sigma * sigma);
}

double haar_abs_statistic(const Vector& v) {
  if (v.size() == 0) throw DomainError("haar_abs_statistic: empty vector");
  return v.cwiseAbs().sum() / std::sqrt(static_cast<double>(v.size()));
}

Histogram histogram(const Vector& values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw DomainError("histogram: need bins >= 1 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
  h.counts.assign(bins, 0);
  for (Index i = 0; i < values.size(); ++i) {
    const double x = values[i];
    if (x < lo || x > hi) continue;
    int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[b];
  }
  return h;
}

void write_eigenvalues_csv(const Vector& values, std::ostream& os) {
  os << "eigenvalue\n";
  char buf[64];
  for (Index i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", values[i]);
    os << buf;
  }
}

void write_histogram_csv(const Histogram& hist, std::ostream& os) {
  os << "left,right,count\n";
  char buf[96];
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%ld\n", hist.edges[b], hist.edges[b + 1], hist.counts[b]);
    os << buf;
  }
}

}  // namespace sktap
