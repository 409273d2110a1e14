#include <gtest/gtest.h>

#include <cmath>

#include "stabcert/quadrature.hpp"

using namespace stabcert;

namespace {
Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd out(1);
  out(0) = v;
  return out;
}
}  // namespace

TEST(Simpson, ExactOnCubics) {
  const auto v = simpson([](double t) { return scalar(t * t * t - 2 * t); },
                         0.0, 2.0, 2);
  EXPECT_NEAR(v(0), 4.0 - 4.0, 1e-14);
  EXPECT_THROW(simpson([](double) { return scalar(0); }, 0, 1, 3), Error);
}

TEST(ExpIntegral, MatchesClosedFormAcrossRegimes) {
  for (double mu : {-3.0, -1e-9, 0.0, 1e-12, 1e-5, 0.7, 250.0}) {
    const long double m = mu;
    const double expected =
        mu == 0.0 ? 1.5
                  : static_cast<double>(std::exp(-0.5L * m) *
                                        -std::expm1(-1.5L * m) / m);
    EXPECT_NEAR(exp_integral(mu, 0.5, 2.0), expected,
                1e-12 * std::max(1.0, std::abs(expected)))
        << mu;
  }
}

TEST(Graded, ResolvesStiffExponentials) {
  const double rates[] = {0.0, 1.0, 1e3, 1e6};
  const auto r = integrate_graded(
      [&](double t) {
        Eigen::VectorXd v(4);
        for (int i = 0; i < 4; ++i) v(i) = std::exp(-rates[i] * t);
        return v;
      },
      0.0, 1.0, 1e6);
  EXPECT_TRUE(r.converged);
  for (int i = 0; i < 4; ++i)
    EXPECT_NEAR(r.value(i), exp_integral(rates[i], 0.0, 1.0),
                1e-8 * r.value.lpNorm<1>());
}

TEST(Observation, GramianAgreesWithSimpson) {
  const auto d = GridDomain::make(1, 6.0, 96, true);
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{1, 0.2}, d);
  const auto e = make_set(d, shape::PeriodicSlabs{1.5, 0.3});
  const ObservationGramian g(dec, e);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 3; ++i) {
    const auto c = dec.coefficients(random_unit(d, rng));
    const double a = g.evaluate(c, 0.25, 1.5, 0.1);
    const double b = observation_simpson(dec, e, c, 0.25, 1.5, 0.1).value(0);
    EXPECT_NEAR(a, b, 1e-8 * a);
  }
}

TEST(Observation, FullSetIsDiagonal) {
  const auto d = GridDomain::make(1, 3.0, 32, false);
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{0}, d);
  const ObservationGramian g(dec, make_set(d, shape::Full{}));
  std::mt19937_64 rng(2);
  const auto c = dec.coefficients(random_unit(d, rng));
  double expected = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j)
    expected += c(j) * c(j) * exp_integral(2 * dec.eigenvalues()[j], 0.0, 1.0);
  EXPECT_NEAR(g.evaluate(c, 0.0, 1.0, 0.0), expected, 1e-10 * expected);
}

TEST(Observation, IntegratorSwitchesToSimpsonOnLargeGrids) {
  const auto d = GridDomain::make(2, 4.0, 64, true);
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{1, 0}, d);
  const auto e = make_set(d, shape::HalfSpace{0, 0.0});
  ObservationIntegrator engine(dec, e);
  EXPECT_FALSE(engine.exact());
  engine.set_interval(0.0, 1.0, 0.0);
  // The constant mode is invariant: observation = T |E| / |box|.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dec.size()));
  c(0) = 1.0;
  EXPECT_NEAR(engine.value(c), 0.5, 1e-9);
}

TEST(Observation, DensitySumsToTheFullIntegral) {
  const auto d = GridDomain::make(1, 4.0, 64, true);
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{2, 0}, d);
  std::mt19937_64 rng(4);
  const auto c = dec.coefficients(random_unit(d, rng));
  const auto density = observation_density(dec, c, 0.0, 0.7, 0.0);
  const ObservationGramian g(dec, make_set(d, shape::Full{}));
  EXPECT_NEAR(density.value.sum() * d.cell_volume(), g.evaluate(c, 0.0, 0.7, 0.0),
              1e-8);
}
