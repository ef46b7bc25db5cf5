#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <vector>

#include "fjgame/detection.hpp"
#include "fjgame/fj.hpp"
#include "fjgame/random.hpp"
#include "fjgame/stats.hpp"
#include "oracles.hpp"

using namespace fjgame;

namespace {

bool throws_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

std::span<const double> span_of(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

TEST(Stats, IncompleteBetaMatchesBoost) {
  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    const double a = 0.1 + 50.0 * rng.uniform();
    const double b = 0.1 + 50.0 * rng.uniform();
    const double x = rng.uniform();
    EXPECT_NEAR(stats::incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12) << a << ' ' << b << ' ' << x;
  }
}

TEST(Stats, IncompleteGammaMatchesBoost) {
  Rng rng(2);
  for (int k = 0; k < 500; ++k) {
    const double a = 0.1 + 40.0 * rng.uniform();
    const double x = 80.0 * rng.uniform();
    EXPECT_NEAR(stats::incomplete_gamma_upper(a, x), boost::math::gamma_q(a, x), 1e-12) << a << ' ' << x;
  }
}

TEST(Stats, StudentTMatchesBoost) {
  for (double dof : {1.0, 2.0, 5.0, 30.0, 199.0}) {
    const boost::math::students_t dist(dof);
    for (double t : {0.0, 0.1, 1.0, 1.96, 3.0, 8.0, -2.5}) {
      const double expect = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
      EXPECT_NEAR(stats::student_t_two_sided_p(t, dof), expect, 1e-12);
    }
  }
}

TEST(Stats, ChiSquareOneDofIsErfc) {
  for (double x : {0.01, 0.5, 1.0, 3.84, 10.0, 30.0}) {
    EXPECT_NEAR(stats::chi_square_survival(x, 1.0), std::erfc(std::sqrt(x / 2.0)), 1e-12);
    const boost::math::chi_squared dist(3.0);
    EXPECT_NEAR(stats::chi_square_survival(x, 3.0), boost::math::cdf(boost::math::complement(dist, x)), 1e-12);
  }
}

TEST(Stats, TTestKnownSample) {
  // mean 3, sd sqrt(2.5), n 5: t = 3 / (sqrt(2.5)/sqrt(5)) = 3 sqrt(2).
  const std::vector<double> data{1, 2, 3, 4, 5};
  const stats::TTestResult r = stats::t_test_one_sample(span_of(data), 0.0);
  EXPECT_NEAR(r.t, 3.0 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(r.dof, 4);
  const boost::math::students_t dist(4.0);
  EXPECT_NEAR(r.p_value, 2.0 * boost::math::cdf(boost::math::complement(dist, r.t)), 1e-12);
}

TEST(Stats, TTestDegenerateSamples) {
  const std::vector<double> constant(10, 2.0);
  const auto same = stats::t_test_one_sample(span_of(constant), 2.0);
  EXPECT_EQ(same.status, stats::SampleStatus::DegenerateSample);
  EXPECT_EQ(same.p_value, 1.0);
  const auto off = stats::t_test_one_sample(span_of(constant), 0.0);
  EXPECT_EQ(off.status, stats::SampleStatus::ZeroVariance);
  EXPECT_EQ(off.p_value, 0.0);
  const std::vector<double> one{1.0};
  EXPECT_TRUE(throws_kind(ErrorKind::EmptySample, [&] { stats::t_test_one_sample(span_of(one), 0.0); }));
}

TEST(Stats, ChiSquareSignTest) {
  std::vector<double> data(100, 1.0);
  for (int i = 0; i < 30; ++i) data[static_cast<std::size_t>(i)] = -1.0;
  const auto r = stats::chi_square_sign_test(span_of(data), 0.5);
  EXPECT_EQ(r.positive, 70);
  EXPECT_EQ(r.negative, 30);
  EXPECT_NEAR(r.chi2, 16.0, 1e-12);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(8.0)), 1e-14);
}

TEST(Detection, ReconstructionInvertsEquilibriumMap) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(30));
    const WeightedGraph g(n, oracle::random_connected_edges(n, 0.2, rng, true));
    Eigen::VectorXd alpha(n);
    for (Index i = 0; i < n; ++i) alpha(i) = 0.05 + 0.9 * rng.uniform();
    const SusceptibilityProfile prof(alpha);
    const ReportedOpinions sp(oracle::gaussian_vector(n, rng));
    const ExpressedOpinions z = fj_equilibrium(g, prof, sp);
    const ReportedOpinions back = reconstruct_intrinsic(g, prof, z);
    EXPECT_LE((back.values() - sp.values()).norm(), 1e-8 * std::max(1.0, sp.values().norm()));
  }
}

TEST(Detection, ReconstructionExamples) {
  const WeightedGraph k2(2, {{0, 1, 1.0}});
  const auto a = SusceptibilityProfile::shared(2, 0.5);
  const ReportedOpinions r = reconstruct_intrinsic(k2, a, ExpressedOpinions(Eigen::Vector2d(2.0 / 3.0, 0.0)));
  EXPECT_NEAR(r[0], 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(r[1], -2.0 / 3.0, 1e-14);
  const Eigen::Vector3d z(0.3, -1.0, 2.0);
  const ReportedOpinions same = reconstruct_intrinsic(WeightedGraph(3, {}), SusceptibilityProfile::shared(3, 0.2),
                                                      ExpressedOpinions(z));
  EXPECT_EQ(same.values(), Eigen::VectorXd(z));
}

TEST(Detection, VerdictFollowsSignificance) {
  Rng rng(12);
  const Index n = 60;
  const WeightedGraph g(n, oracle::random_connected_edges(n, 0.1, rng, false));
  const auto a = SusceptibilityProfile::shared(n, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const TrueOpinions s(oracle::gaussian_vector(n, rng));
    const ExpressedOpinions z = fj_equilibrium(g, a, s);
    const DetectionOutcome d = detect_manipulation(g, a, z, 0.0, 0.05);
    EXPECT_EQ(d.verdict == Verdict::Manipulation, d.p_value < 0.05);
    EXPECT_EQ(d.dof, n - 1);
    EXPECT_EQ(detect_manipulation(g, a, z, 0.0, 1.0).verdict, Verdict::Manipulation);
  }
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidArgument, [&] {
    detect_manipulation(g, a, ExpressedOpinions(Eigen::VectorXd::Zero(n)), 0.0, 0.0);
  }));
}

TEST(Detection, ShiftedReportsAreFlagged) {
  Rng rng(13);
  const Index n = 200;
  const WeightedGraph g(n, oracle::random_connected_edges(n, 0.03, rng, false));
  const auto a = SusceptibilityProfile::shared(n, 0.5);
  Eigen::VectorXd sp = oracle::gaussian_vector(n, rng);
  sp.array() += 1.0;
  const DetectionOutcome d = detect_manipulation(g, a, fj_equilibrium(g, a, ReportedOpinions(sp)), 0.0);
  EXPECT_EQ(d.verdict, Verdict::Manipulation);
  EXPECT_LT(d.p_value, 1e-6);
}
