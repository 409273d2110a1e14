#include <gtest/gtest.h>

#include <cmath>

#include "stabcert/feedback.hpp"
#include "stabcert/specineq.hpp"

using namespace stabcert;

namespace {

const GridDomain& line() {
  static const GridDomain d = GridDomain::make(1, 10.0, 256, false);
  return d;
}

// -Laplacian + |x|^2 - 4: eigenvalues 2k - 3.
const SpectralDecomposition& shifted() {
  static const SpectralDecomposition dec =
      SpectralDecomposition::diagonalize(ShiftedHermite{4.0}, line());
  return dec;
}

}  // namespace

TEST(Damping, OmegaFormula) {
  EXPECT_DOUBLE_EQ(damping_omega(0.0, 1.0, 1), std::min(-1.0, 0.5 * std::exp(-2.0)));
  EXPECT_DOUBLE_EQ(damping_omega(0.5, 0.1, 4), std::min(6.0, 0.5 * std::exp(-0.8)));
  const auto b = damping_decay_bound(0.0, 0.3, 1, 6);
  EXPECT_EQ(b.chosen_n, 2);
  EXPECT_DOUBLE_EQ(b.omega, 0.5 * std::exp(-1.2));
  EXPECT_THROW(damping_decay_bound(0.0, 0.3, 1, 1), Error);
}

TEST(Damping, BoundHoldsOnSlabs) {
  const auto d = GridDomain::make(1, 5.0, 128, true);
  const auto e = make_set(d, shape::PeriodicSlabs{1.0, 0.25});
  const auto half = SpectralDecomposition::diagonalize(FractionalLaplacian{1, 0}, d);
  const auto lap = SpectralDecomposition::diagonalize(FractionalLaplacian{2, 0}, d);
  const auto b = damping_decay_bound(half, e, 0.0, 1, 8);
  EXPECT_GT(b.omega, 0.0);
  EXPECT_GE(damped_min_eigenvalue(lap, e), b.omega);
}

TEST(Damping, ClosedLoopDecaysAtTheDampedRate) {
  const auto d = GridDomain::make(1, 5.0, 64, true);
  const auto e = make_set(d, shape::PeriodicSlabs{1.0, 0.5});
  const auto lap = SpectralDecomposition::diagonalize(FractionalLaplacian{2, 0}, d);
  const double lmin = damped_min_eigenvalue(lap, e);
  std::mt19937_64 rng(8);
  const auto r = simulate_decay(lap, DampingFeedback{e}, random_unit(d, rng), 20.0, 0.1);
  EXPECT_NEAR(r.fitted_omega, lmin, 1e-3);
  EXPECT_TRUE(r.monotone_tail);
}

TEST(FiniteRank, UnstableModesAndGram) {
  const auto e = make_set(line(), shape::HalfSpace{0, 0.0});
  const auto fb = build_finite_rank_feedback(shifted(), e);
  ASSERT_EQ(fb.unstable_count, 2u);
  EXPECT_NEAR(fb.eigenvalues[0], -3.0, 1e-3);
  EXPECT_NEAR(fb.eigenvalues[1], -1.0, 1e-3);
  EXPECT_DOUBLE_EQ(fb.rho, fb.eigenvalues[0] - 1.0);
  // Midpoint sums of the analytic Hermite functions over E.
  double g[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t c = 0; c < line().size(); ++c) {
    if (!e.contains(c)) continue;
    const double x = line().center(c)[0];
    const double f[2] = {hermite_function(0, x), hermite_function(1, x)};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g[i][j] += f[i] * f[j] * line().spacing();
  }
  EXPECT_NEAR(fb.gram(0, 0), g[0][0], 1e-6);
  EXPECT_NEAR(fb.gram(1, 1), g[1][1], 1e-6);
  EXPECT_NEAR(std::abs(fb.gram(0, 1)), std::abs(g[0][1]), 1e-6);
  // The continuum values differ by the midpoint error O(h^2).
  EXPECT_NEAR(std::abs(fb.gram(0, 1)), 1.0 / std::sqrt(2.0 * M_PI), 5e-4);
  const Eigen::MatrixXd I = fb.gram * fb.gram_inverse;
  EXPECT_LT((I - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FiniteRank, FeedbackActsOnlyThroughUnstableModes) {
  const auto e = make_set(line(), shape::HalfSpace{0, 0.0});
  const auto fb = build_finite_rank_feedback(shifted(), e);
  EXPECT_LT(norm(fb.apply(shifted().mode(3))), 1e-12);
  const auto k0 = fb.apply(shifted().mode(0));
  // K phi_1 = rho sum_i (A^{-1})_{i1} phi_i.
  EXPECT_NEAR(inner_product(k0, shifted().mode(0)), fb.rho * fb.gram_inverse(0, 0),
              1e-10);
}

TEST(FiniteRank, AlreadyStableAndSingularCases) {
  const auto stable = SpectralDecomposition::diagonalize(ShiftedHermite{0}, line());
  try {
    build_finite_rank_feedback(stable, make_set(line(), shape::Full{}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kAlreadyStable);
  }
  // One cell cannot separate two modes.
  try {
    build_finite_rank_feedback(shifted(), make_set(line(), shape::Custom{{130}}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kSingularGram);
    EXPECT_NE(std::string(err.what()).find("coefficient vector"), std::string::npos);
  }
}

TEST(FiniteRank, FullSetGivesUnitRateOnTheGroundMode) {
  const auto fb = build_finite_rank_feedback(shifted(), make_set(line(), shape::Full{}));
  const auto r = simulate_decay(shifted(), fb, shifted().mode(0), 10.0, 0.01);
  EXPECT_NEAR(r.fitted_omega, 1.0, 1e-3);
  EXPECT_TRUE(r.monotone_tail);
}

TEST(FiniteRank, IntegratorIsSecondOrder) {
  const auto e = make_set(line(), shape::HalfSpace{0, 0.0});
  const auto fb = build_finite_rank_feedback(shifted(), e);
  std::mt19937_64 rng(2);
  const auto y0 = random_unit(line(), rng);
  auto run = [&](double dt) {
    const ClosedLoop loop(shifted(), fb);
    auto c = shifted().coefficients(y0);
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < steps; ++i) c = loop.step_coefficients(c, dt);
    return c;
  };
  // Below the substep cap dt ||K|| <= 0.1 the requested dt is used as is.
  ASSERT_LT(0.002 * fb.norm_bound(), 0.1);
  const auto ref = run(1e-4);
  const auto coarse = run(0.002), fine = run(0.001);
  const double ratio = (coarse - ref).norm() / (fine - ref).norm();
  EXPECT_GT(ratio, 3.0);
}

TEST(FiniteRank, HalfLineFeedbackStabilizes) {
  const auto e = make_set(line(), shape::HalfSpace{0, 0.0});
  const auto fb = build_finite_rank_feedback(shifted(), e);
  const ClosedLoop loop(shifted(), fb);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3; ++i) {
    const auto r = simulate_decay(loop, random_unit(line(), rng), 20.0, 0.01);
    EXPECT_GT(r.fitted_omega, 0.2);
    EXPECT_TRUE(r.monotone_tail);
    EXPECT_EQ(r.times.size(), 101u);
  }
}
