#include "oracles.hpp"

#include "sktap/spectra.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace sktap;

namespace {

Matrix scaled_goe(int n, std::uint64_t seed) { return oracle::goe(n, seed) / std::sqrt(static_cast<double>(n)); }

double semicircle_ks(const Matrix& m) {
  return ks_distance(EsdCurve(sym_eigen(m).eigenvalues), [](double x) { return semicircle_cdf(x, 1.0); });
}

}  // namespace

TEST(SymEigen, DiagonalSortedDescending) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  const EigenDecomposition e = sym_eigen(d);
  EXPECT_EQ(e.eigenvalues(0), 3);
  EXPECT_EQ(e.eigenvalues(1), 2);
  EXPECT_EQ(e.eigenvalues(2), 1);
  EXPECT_FALSE(e.has_vectors());
}

TEST(SymEigen, RejectsAsymmetric) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 2) = 1e-6;
  EXPECT_THROW(sym_eigen(m), DomainError);
}

TEST(SymEigen, GoeTopEigenvalue) {
  const double l1 = sym_eigen(scaled_goe(300, 1)).eigenvalues(0);
  EXPECT_GE(l1, 1.8);
  EXPECT_LE(l1, 2.3);
}

TEST(SymEigen, JacobiOracle) {
  const Matrix m = oracle::goe(50, 77);
  const EigenDecomposition e = sym_eigen(m);
  const std::vector<double> ref = oracle::jacobi_eigenvalues(m);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(e.eigenvalues(i), ref[i], 1e-9);
}

TEST(SymEigen, VectorsReconstructAndAreOrthogonal) {
  const Matrix m = oracle::goe(80, 5);
  const EigenDecomposition e = sym_eigen(m, true);
  ASSERT_TRUE(e.has_vectors());
  const Matrix& V = e.eigenvectors;
  const Matrix rec = V * e.eigenvalues.asDiagonal() * V.transpose();
  EXPECT_LT((m - rec).norm() / m.norm(), 1e-9);
  EXPECT_LT((V.transpose() * V - Matrix::Identity(80, 80)).norm(), 1e-9);
  for (int i = 1; i < 80; ++i) EXPECT_GE(e.eigenvalues(i - 1), e.eigenvalues(i));
}

TEST(SymEigen, TraceIdentity) {
  for (std::uint64_t s : {1, 2, 3}) {
    const Matrix m = oracle::goe(120, s);
    EXPECT_NEAR(sym_eigen(m).eigenvalues.sum(), m.trace(), 1e-8 * m.norm());
  }
}

TEST(TopEigpair, Diagonal) {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 5, 1;
  const TopEigenpair t = top_eigpair(d);
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.lambda1, 5.0, 1e-12);
  EXPECT_NEAR(std::abs(t.v(0)), 1.0, 1e-12);
  EXPECT_NEAR(t.v(1), 0.0, 1e-12);
}

TEST(TopEigpair, AgreesWithFullSpectrum) {
  const Matrix m = oracle::goe(200, 9);
  const TopEigenpair t = top_eigpair(m);
  EXPECT_NEAR(t.lambda1, sym_eigen(m).eigenvalues(0), 1e-8);
  EXPECT_NEAR(t.v.norm(), 1.0, 1e-14);
  EXPECT_LT((m * t.v - t.lambda1 * t.v).norm(), 1e-10);
}

TEST(TopEigpair, GoeResidual) {
  const TopEigenpair t = top_eigpair(scaled_goe(2000, 4), 1e-8);
  EXPECT_TRUE(t.converged);
  EXPECT_LT(t.residual, 1e-8);
}

TEST(TopEigpair, DeterministicAndStartable) {
  const Matrix m = oracle::goe(150, 3);
  const TopEigenpair a = top_eigpair(m), b = top_eigpair(m);
  EXPECT_EQ(a.lambda1, b.lambda1);
  const Vector start = Vector::Ones(150);
  EXPECT_NEAR(top_eigpair(m, 1e-10, &start).lambda1, a.lambda1, 1e-9);
}

TEST(DecoupledTop, MatchesDenseWhenNothingDropped) {
  const Matrix m = oracle::goe(100, 8);
  const DecoupledTop d = top_eigenvalue_decoupled(m);
  EXPECT_EQ(d.excluded, 0);
  EXPECT_NEAR(d.lambda1, sym_eigen(m).eigenvalues(0), 1e-12);
}

TEST(DecoupledTop, DropsHugeNegativeDiagonal) {
  Matrix m = oracle::goe(100, 8) * 0.1;
  m(3, 3) = -1e12;
  m(40, 40) = -1e15;
  const DecoupledTop d = top_eigenvalue_decoupled(m);
  EXPECT_EQ(d.excluded, 2);
  // the limit of a diverging diagonal entry is the principal submatrix without that site
  std::vector<int> keep;
  for (int i = 0; i < 100; ++i)
    if (i != 3 && i != 40) keep.push_back(i);
  Matrix kept(98, 98);
  for (int r = 0; r < 98; ++r)
    for (int c = 0; c < 98; ++c) kept(r, c) = m(keep[r], keep[c]);
  EXPECT_NEAR(d.lambda1, oracle::jacobi_eigenvalues(kept)[0], 1e-12);
}

TEST(Esd, RightContinuous) {
  const EsdCurve e(std::vector<double>{2.0, 1.0, 1.0, 3.0});
  EXPECT_EQ(e.cdf(0.5), 0.0);
  EXPECT_EQ(e.cdf(1.0), 0.5);
  EXPECT_EQ(e.left_limit(1.0), 0.0);
  EXPECT_EQ(e.cdf(3.0), 1.0);
  EXPECT_EQ(e.left_limit(3.0), 0.75);
}

TEST(KsDistance, PointMassAgainstItself) {
  const EsdCurve e(std::vector<double>(10, 0.7));
  EXPECT_EQ(ks_distance(e, [](double x) { return x >= 0.7 ? 1.0 : 0.0; }), 0.0);
  EXPECT_NEAR(ks_distance(e, [](double x) { return x >= 0.8 ? 1.0 : 0.0; }), 1.0, 0.0);
}

TEST(KsDistance, GlivenkoCantelli) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(10000);
  for (double& v : x) v = nd(gen);
  const double d = ks_distance(EsdCurve(x), [](double t) { return 0.5 * boost::math::erfc(-t / std::sqrt(2.0)); });
  EXPECT_LT(d, 0.02);
  EXPECT_GT(d, 0.0);
}

TEST(KsDistance, SemicircleConvergence) {
  const double k500 = semicircle_ks(scaled_goe(500, 1));
  const double k1000 = semicircle_ks(scaled_goe(1000, 1));
  const double k2000 = semicircle_ks(scaled_goe(2000, 1));
  EXPECT_LT(k2000, 0.03);
  EXPECT_LT(k2000, 0.05);
  EXPECT_LE(k1000, k500);
  EXPECT_LE(k2000, k1000);
}

TEST(Semicircle, DensityAndCdf) {
  for (double s : {0.5, 1.0, 2.5}) {
    EXPECT_EQ(semicircle_cdf(-2 * s, s), 0.0);
    EXPECT_EQ(semicircle_cdf(2 * s, s), 1.0);
    EXPECT_NEAR(semicircle_cdf(0.0, s), 0.5, 1e-15);
    double acc = 0.0;
    const int pts = 200000;
    const double a = -2 * s, b = 0.7 * s, dx = (b - a) / pts;
    for (int i = 0; i < pts; ++i) acc += semicircle_density(a + (i + 0.5) * dx, s) * dx;
    EXPECT_NEAR(acc, semicircle_cdf(b, s), 1e-7);
  }
}

TEST(HaarStatistic, ClosedForms) {
  const int n = 64;
  Vector e1 = Vector::Zero(n);
  e1(0) = 1.0;
  EXPECT_NEAR(haar_abs_statistic(e1), 1.0 / 8.0, 1e-15);
  EXPECT_NEAR(haar_abs_statistic(Vector::Constant(n, 1.0 / 8.0)), 1.0, 1e-15);
}

TEST(HaarStatistic, GoeTopEigenvector) {
  const TopEigenpair t = top_eigpair(scaled_goe(4000, 2), 1e-8);
  EXPECT_NEAR(haar_abs_statistic(t.v), std::sqrt(2.0 / M_PI), 0.02);
}

TEST(Perturbation, WeylBound) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = oracle::goe(60, 100 + trial);
    Matrix e(60, 60);
    const double scale = std::pow(10.0, -trial % 5);
    for (int i = 0; i < 60; ++i)
      for (int j = i; j < 60; ++j) e(i, j) = e(j, i) = scale * nd(gen);
    const double d = std::abs(sym_eigen(m + e).eigenvalues(0) - sym_eigen(m).eigenvalues(0));
    EXPECT_LE(d, e.norm());
  }
}

TEST(Perturbation, LowRankMovesEsdLittle) {
  const int n = 1000;
  const Matrix m = scaled_goe(n, 12);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  Matrix e = Matrix::Zero(n, n);
  for (int r = 0; r < 5; ++r) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = nd(gen);
    e += 3.0 * u * u.transpose() / n;
  }
  EXPECT_LT(std::abs(semicircle_ks(m + e) - semicircle_ks(m)), 0.03);
}

TEST(Writers, CsvShapes) {
  Vector v(4);
  v << 0.5, -1.0, 2.0, 0.25;
  std::ostringstream a;
  write_eigenvalues_csv(v, a);
  EXPECT_EQ(a.str(), "eigenvalue\n0.5\n-1\n2\n0.25\n");
  const Histogram h = histogram(v, 2, -1.0, 3.0);
  ASSERT_EQ(h.edges.size(), 3u);
  EXPECT_EQ(h.counts[0] + h.counts[1], 4);
  std::ostringstream b;
  write_histogram_csv(h, b);
  EXPECT_EQ(b.str().substr(0, 17), "left,right,count\n");
}
