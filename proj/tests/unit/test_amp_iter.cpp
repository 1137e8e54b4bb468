#include "sktap/amp_iter.hpp"
#include "sktap/rs_core.hpp"
#include "sktap/spectra.hpp"

#include <gtest/gtest.h>


#include <cmath>
#include <sstream>

using namespace sktap;

namespace {

struct Fixture {
  ModelParams p = ModelParams::make(1.0, 0.5);
  RsSolution rs = solve_q(p);
};

AmpState run(const Fixture& f, Index n, Seed seed, int k) {
  AmpState st = amp_init(f.p, f.rs, sample_disorder(n, seed), std::max(k, 2));
  return amp_advance(std::move(st), k);
}

double max_orthonormality_error(const AmpState& st) {
  double worst = 0.0;
  for (std::size_t s = 0; s < st.phis.size(); ++s) {
    for (std::size_t t = 0; t < st.phis.size(); ++t) {
      const double target = s == t ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(inner(st.phis[s], st.phis[t]) - target));
    }
  }
  return worst;
}

}  // namespace

TEST(SampleDisorder, Deterministic) {
  const DisorderMatrix a = sample_disorder(50, 77), b = sample_disorder(50, 77), c = sample_disorder(50, 78);
  EXPECT_TRUE((a.entries.array() == b.entries.array()).all());
  EXPECT_FALSE((a.entries.array() == c.entries.array()).all());
  EXPECT_THROW(sample_disorder(1, 1), DomainError);
}

TEST(SampleDisorder, EntryStatistics) {
  const Index n = 2000;
  const DisorderMatrix g = sample_disorder(n, 3);
  const double nn = static_cast<double>(n) * n;
  const double mean = g.entries.sum() / nn;
  const double var = (g.entries.array() - mean).square().sum() / nn;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(nn));
  EXPECT_NEAR(var, 1.0, 0.01);
  const double diag_sq = g.entries.diagonal().array().square().mean();
  EXPECT_GE(diag_sq, 0.9);
  EXPECT_LE(diag_sq, 1.1);
}

TEST(Symmetrize, HandMatrix) {
  Matrix g(2, 2);
  g << 1, 2, 0, 3;
  const SymmetrizedDisorder s = symmetrize(g);
  const double r = std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(s.entries(0, 0), 2 / r);
  EXPECT_DOUBLE_EQ(s.entries(0, 1), 2 / r);
  EXPECT_DOUBLE_EQ(s.entries(1, 0), 2 / r);
  EXPECT_DOUBLE_EQ(s.entries(1, 1), 6 / r);
  Matrix id = Matrix::Identity(3, 3);
  EXPECT_TRUE(symmetrize(id).entries.isApprox(std::sqrt(2.0) * id));
}

TEST(Symmetrize, ExactSymmetryAndVariances) {
  const Index n = 600;
  const SymmetrizedDisorder s = symmetrize(sample_disorder(n, 8));
  EXPECT_TRUE((s.entries.array() == s.entries.transpose().array()).all());
  double off = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) off += s.entries(i, j) * s.entries(i, j);
  off /= n * (n - 1) / 2.0;
  EXPECT_NEAR(off, 1.0, 0.02);
  EXPECT_NEAR(s.entries.diagonal().array().square().mean(), 2.0, 0.4);
}

TEST(Symmetrize, ScaledMatrixIsSemicircular) {
  const Index n = 1000;
  const SymmetrizedDisorder s = symmetrize(sample_disorder(n, 21));
  const EigenDecomposition e = sym_eigen(s.entries / std::sqrt(static_cast<double>(n)));
  EXPECT_GE(e.eigenvalues[0], 1.85);
  EXPECT_LE(e.eigenvalues[0], 2.15);
  EXPECT_LT(ks_distance(EsdCurve(e.eigenvalues), [](double x) { return semicircle_cdf(x, 1.0); }), 0.05);
}

TEST(AmpInit, InitialState) {
  Fixture f;
  const DisorderMatrix g = sample_disorder(40, 2);
  const AmpState st = amp_init(f.p, f.rs, g);
  EXPECT_EQ(st.k, 1);
  EXPECT_EQ(inner(st.phis[0], st.phis[0]), 1.0);
  EXPECT_NEAR(norm_sq(st.m_k), f.rs.q, 1e-15);
  EXPECT_TRUE((st.g_k.array() == g.entries.array()).all());
  EXPECT_EQ(st.schedule.size(), static_cast<std::size_t>(kDefaultKMax));
  EXPECT_THROW(amp_init(f.p, f.rs, g, 1), DomainError);
}

TEST(AmpStep, OrthonormalBasisAndTanhLink) {
  Fixture f;
  AmpState st = amp_init(f.p, f.rs, sample_disorder(300, 4), 10);
  for (int k = 2; k <= 10; ++k) {
    st = amp_step(std::move(st));
    ASSERT_EQ(st.k, k);
    EXPECT_LT(max_orthonormality_error(st), 1e-10);
    for (Index i = 0; i < st.n(); ++i) {
      ASSERT_EQ(st.m_k[i], std::tanh(st.h_k[i]));
      ASSERT_LT(std::abs(st.m_k[i]), 1.0);
    }
  }
}

TEST(AmpStep, DeflationAnnihilatesUsedDirections) {
  Fixture f;
  AmpState st = amp_init(f.p, f.rs, sample_disorder(400, 6), 8);
  for (int k = 1; k < 8; ++k) {
    st = amp_step(std::move(st));
    const double bound = 1e-8 * std::sqrt(static_cast<double>(st.n()));
    for (int s = 0; s < st.k - 1; ++s) {
      EXPECT_LT((st.g_k * st.phis[s]).norm(), bound) << "k=" << st.k << " s=" << s + 1;
      EXPECT_LT((st.g_k.transpose() * st.phis[s]).norm(), bound);
    }
  }
}

TEST(AmpStep, RejectsShortSchedule) {
  Fixture f;
  // gamma_1..gamma_k drive the step out of k, so two schedule entries reach k = 3
  AmpState st = amp_init(f.p, f.rs, sample_disorder(30, 6), 2);
  st = amp_step(amp_step(std::move(st)));
  ASSERT_EQ(st.k, 3);
  EXPECT_THROW(amp_step(std::move(st)), DomainError);
}

TEST(AmpStep, DegenerateBasisReported) {
  Fixture f;
  AmpState st = amp_init(f.p, f.rs, sample_disorder(2, 6), 6);
  EXPECT_THROW(amp_advance(std::move(st), 6), NumericalError);
}

TEST(AmpStep, Deterministic) {
  Fixture f;
  const AmpState a = run(f, 200, 99, 6), b = run(f, 200, 99, 6);
  EXPECT_TRUE((a.m_k.array() == b.m_k.array()).all());
}

TEST(AmpStep, NegativeFieldMirrorsPositive) {
  Fixture f;
  Fixture g;
  g.p = ModelParams::make(1.0, -0.5);
  g.rs = solve_q(g.p);
  const AmpState a = run(f, 150, 12, 5), b = run(g, 150, 12, 5);
  EXPECT_LT((a.m_k + b.m_k).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProjectionP, ProjectorProperties) {
  Fixture f;
  AmpState st = amp_init(f.p, f.rs, sample_disorder(120, 1), 6);
  const Matrix p1 = projection_P(st);
  EXPECT_TRUE(p1.isApprox(Matrix::Constant(120, 120, 1.0 / 120)));
  EXPECT_NEAR(p1.trace(), 1.0, 1e-12);
  st = amp_advance(std::move(st), 5);
  const Matrix p = projection_P(st);
  EXPECT_LT((p * p - p).norm(), 1e-8);
  EXPECT_LT((p - p.transpose()).norm(), 1e-10);
  EXPECT_NEAR(p.trace(), 5.0, 1e-8);
}

TEST(Diagnostics, RequiresSecondStep) {
  Fixture f;
  const AmpState st = amp_init(f.p, f.rs, sample_disorder(20, 1));
  EXPECT_THROW(diagnostics(st, f.rs), DomainError);
}

TEST(Diagnostics, OverlapsTrackSchedule) {
  Fixture f;
  const int k = 6, seeds = 20;
  std::vector<double> mean(k, 0.0);
  for (int r = 0; r < seeds; ++r) {
    const AmpDiagnostics d = diagnostics(run(f, 2000, 1000 + r, k), f.rs);
    ASSERT_EQ(d.gamma_overlaps.size(), static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) mean[s] += d.gamma_overlaps[s] / seeds;
  }
  const GammaSchedule sch = gamma_schedule(f.p, f.rs.q, k);
  for (int s = 1; s <= 4; ++s) EXPECT_NEAR(mean[s - 1], sch.gamma(s), 0.03) << "s=" << s;
}

TEST(Diagnostics, PhiXiOverlapHasVarianceOneOverN) {
  Fixture f;
  const Index n = 500;
  const int seeds = 200;
  std::vector<double> v;
  for (int r = 0; r < seeds; ++r) v.push_back(diagnostics(run(f, n, 5000 + r, 3), f.rs).phi_xi_overlap);
  double m = 0.0;
  for (double x : v) m += x / seeds;
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m) / (seeds - 1);
  EXPECT_NEAR(var * n, 1.0, 0.3);
}

TEST(StateEvolution, FieldAveragesMatchGaussianLaw) {
  Fixture f;
  const int seeds = 20, k = 6;
  const Index n = 1500;
  auto sech4 = [](double y) { return std::pow(1.0 / std::cosh(y), 4); };
  std::vector<std::function<double(double)>> fs = {[](double y) { return std::tanh(y); },
                                                    [](double y) { return std::tanh(y) * std::tanh(y); }, sech4};
  std::vector<std::vector<double>> per_seed(fs.size());
  for (int r = 0; r < seeds; ++r) {
    const AmpState st = run(f, n, 300 + r, k);
    for (std::size_t j = 0; j < fs.size(); ++j) {
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) acc += fs[j](st.h_k[i]);
      per_seed[j].push_back(acc / n);
    }
  }
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const double target = field_expectation(f.p, f.rs.q, fs[j]);
    double m = 0.0, v = 0.0;
    for (double x : per_seed[j]) m += x / seeds;
    for (double x : per_seed[j]) v += (x - m) * (x - m) / (seeds - 1);
    EXPECT_NEAR(m, target, 3.0 * std::sqrt(v / seeds)) << "f#" << j;
  }
}

TEST(StateCsv, HeaderAndRows) {
  Fixture f;
  const AmpState st = run(f, 5, 1, 3);
  std::ostringstream os;
  write_state_csv(st, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "i,h,m,phi_k");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}
