#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"

using namespace stabcert;

namespace {

GridDomain periodic1(int m = 32, double R = 4.0) {
  return GridDomain::make(1, R, m, true);
}

double max_abs(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

void expect_orthonormal(const SpectralDecomposition& dec, double tol) {
  const Eigen::MatrixXd V = dec.modes(dec.size());
  const Eigen::MatrixXd G = V.transpose() * V * dec.domain().cell_volume();
  const auto n = static_cast<Eigen::Index>(dec.size());
  EXPECT_LT((G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(Fourier, BasisIsOrthonormal1D) {
  expect_orthonormal(
      SpectralDecomposition::diagonalize(FractionalLaplacian{1, 0}, periodic1()),
      1e-12);
}

TEST(Fourier, BasisIsOrthonormal2D) {
  const auto d = GridDomain::make(2, 3.0, 8, true);
  expect_orthonormal(
      SpectralDecomposition::diagonalize(FractionalLaplacian{1.5, 0}, d), 1e-12);
}

TEST(Fourier, EigenvaluesAreSymbolValues) {
  const auto d = periodic1(16, M_PI);
  const auto dec =
      SpectralDecomposition::diagonalize(FractionalLaplacian{2.0, 0.5}, d);
  std::vector<double> expected;
  for (int q = -8; q < 8; ++q) expected.push_back(q * q - 0.5);
  std::sort(expected.begin(), expected.end());
  ASSERT_EQ(dec.eigenvalues().size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    EXPECT_NEAR(dec.eigenvalues()[i], expected[i], 1e-12);
}

TEST(Fourier, ModesAreEigenvectorsOfTheDenseMatrix) {
  const auto d = GridDomain::make(2, 2.0, 8, true);
  const auto dec =
      SpectralDecomposition::diagonalize(FractionalLaplacian{1.0, 0.3}, d);
  EXPECT_LT(dec.max_residual(), 1e-10);
  const Eigen::MatrixXd H = dec.dense_operator();
  EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fourier, CoefficientRoundTrip) {
  const auto d = GridDomain::make(2, 2.0, 16, true);
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{1, 0}, d);
  std::mt19937_64 rng(3);
  const auto f = random_unit(d, rng);
  const auto c = dec.coefficients(f);
  EXPECT_NEAR(c.norm(), 1.0, 1e-12);
  EXPECT_LT(max_abs(dec.synthesize(c) - f), 1e-12);
  // Dense products agree with the fast transform.
  const Eigen::VectorXd direct =
      dec.modes(dec.size()).transpose() *
      Eigen::Map<const Eigen::VectorXd>(f.values.data(), f.size()) *
      d.cell_volume();
  EXPECT_LT((direct - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dense, HermiteSpectrumMatchesOddIntegers) {
  const auto d = GridDomain::make(1, 10.0, 512, false);
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{0.0}, d);
  for (int k = 0; k < 10; ++k)
    EXPECT_NEAR(dec.eigenvalues()[k], 2 * k + 1, 1e-3);
  EXPECT_LT(dec.max_residual(), 1e-8);
}

TEST(Dense, HermiteSpectrum2D) {
  const auto d = GridDomain::make(2, 7.0, 48, false);
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{0.0}, d);
  // 2 (once), 4 (twice), 6 (three times).
  const double expected[] = {2, 4, 4, 6, 6, 6};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(dec.eigenvalues()[k], expected[k], 1e-3);
}

TEST(Dense, GroundStateMatchesHermiteFunction) {
  const auto d = GridDomain::make(1, 8.0, 256, false);
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{1.0}, d);
  const auto g = hermite_ground_state(d);
  EXPECT_NEAR(std::abs(inner_product(dec.mode(0), g)), 1.0, 1e-8);
}

TEST(Dense, SchrodingerConditionIIRequiresGrowth) {
  const auto d = GridDomain::make(1, 5.0, 64, false);
  const auto flat = sample(d, [](auto) { return 1.0; });
  EXPECT_THROW(validate(Schrodinger{flat, PotentialCondition::kII, 0.5}, d),
               Error);
  const auto bowl = sample(d, [](auto x) { return x[0] * x[0]; });
  EXPECT_NO_THROW(validate(Schrodinger{bowl, PotentialCondition::kII, 0.5}, d));
  EXPECT_THROW(validate(Schrodinger{bowl, PotentialCondition::kI, 1.5}, d),
               Error);
}

TEST(Operators, KindRequiresMatchingBoundary) {
  EXPECT_THROW(SpectralDecomposition::diagonalize(
                   ShiftedHermite{0}, GridDomain::make(1, 5, 32, true)),
               Error);
  EXPECT_THROW(SpectralDecomposition::diagonalize(
                   FractionalLaplacian{1, 0}, GridDomain::make(1, 5, 32, false)),
               Error);
  EXPECT_THROW(SpectralDecomposition::diagonalize(FractionalLaplacian{-1, 0},
                                                  periodic1()),
               Error);
}

TEST(Semigroup, FractionalNormIsExpCt) {
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{1, 2},
                                                      periodic1(64, 5.0));
  // The constant mode attains the norm.
  for (double t : {0.1, 1.0, 5.0}) {
    const auto u = semigroup_apply(dec, t, dec.mode(0));
    EXPECT_NEAR(norm(u), std::exp(2.0 * t), 1e-10 * std::exp(2.0 * t));
  }
}

TEST(Semigroup, IsASemigroup) {
  const auto d = GridDomain::make(1, 6.0, 96, false);
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{0.5}, d);
  std::mt19937_64 rng(11);
  const auto f = random_unit(d, rng);
  const auto a = semigroup_apply(dec, 0.3, semigroup_apply(dec, 0.2, f));
  const auto b = semigroup_apply(dec, 0.5, f);
  EXPECT_LT(max_abs(a - b), 1e-12);
  EXPECT_LT(max_abs(semigroup_apply(dec, 0.0, f) - f), 1e-12);
}

class ProjectionAlgebra : public ::testing::TestWithParam<int> {};

TEST_P(ProjectionAlgebra, HoldsOnRandomFunctions) {
  const bool hermite = GetParam() == 1;
  const auto d = hermite ? GridDomain::make(1, 8.0, 128, false)
                         : GridDomain::make(1, 8.0, 128, true);
  const auto dec = hermite
                       ? SpectralDecomposition::diagonalize(ShiftedHermite{0}, d)
                       : SpectralDecomposition::diagonalize(
                             FractionalLaplacian{1, 0}, d);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto f = random_unit(d, rng), g = random_unit(d, rng);
    const double k = 1.0 + i % 7;
    const auto pf = project(dec, k, f);
    EXPECT_LT(max_abs(project(dec, k, pf) - pf), 1e-10);
    EXPECT_NEAR(inner_product(pf, g), inner_product(f, project(dec, k, g)),
                1e-10);
    EXPECT_LT(max_abs(project(dec, k, semigroup_apply(dec, 0.4, f)) -
                      semigroup_apply(dec, 0.4, pf)),
              1e-10);
    const double a = norm(pf), b = norm(f - pf);
    EXPECT_NEAR(a * a + b * b, 1.0, 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, ProjectionAlgebra, ::testing::Values(0, 1));

TEST(Dissipative, MarginNeverExceedsOne) {
  const auto dec = SpectralDecomposition::diagonalize(FractionalLaplacian{1, 0},
                                                      periodic1(128, 8.0));
  for (double k : {1.0, 3.0, 7.5}) {
    const auto r = dissipative_margin(dec, k, {0.1, 0.5, 1.0}, 30, 9);
    EXPECT_LE(r.max_ratio, 1.0 + 1e-10);
    EXPECT_EQ(r.seed, 9u);
  }
}

TEST(Hermite, PolynomialsAndFunctions) {
  EXPECT_DOUBLE_EQ(hermite_polynomial(0, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(hermite_polynomial(1, 0.7), 1.4);
  const double x = 0.7;
  EXPECT_NEAR(hermite_polynomial(3, x), 8 * x * x * x - 12 * x, 1e-13);
  EXPECT_NEAR(hermite_function(0, 0.0), std::pow(M_PI, -0.25), 1e-15);
  // Orthonormality on a fine grid.
  const auto d = GridDomain::make(1, 12.0, 2048, false);
  const auto b = hermite_basis(6, d);
  for (int i = 0; i <= 6; ++i)
    for (int j = 0; j <= 6; ++j)
      EXPECT_NEAR(inner_product(b.at({i, 0}), b.at({j, 0})), i == j, 1e-10);
}

TEST(Cache, SaveLoadRoundTrip) {
  const auto d = GridDomain::make(1, 5.0, 64, false);
  const auto dec = SpectralDecomposition::diagonalize(ShiftedHermite{0}, d);
  const auto path = std::filesystem::temp_directory_path() / "stabcert_dec.bin";
  dec.save(path.string());
  const auto back = SpectralDecomposition::load(path.string(), ShiftedHermite{0}, d);
  EXPECT_EQ(back.eigenvalues(), dec.eigenvalues());
  EXPECT_EQ(back.modes(4), dec.modes(4));
  EXPECT_THROW(SpectralDecomposition::load(path.string(), ShiftedHermite{1}, d),
               Error);
  std::filesystem::remove(path);
}

TEST(Cache, DiagonalizeCachedReusesTheStore) {
  const auto dir = std::filesystem::temp_directory_path() / "stabcert_cache_t";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  setenv("STABCERT_CACHE_DIR", dir.c_str(), 1);
  const auto d = GridDomain::make(1, 5.0, 64, false);
  const auto a = SpectralDecomposition::diagonalize_cached(ShiftedHermite{0}, d);
  EXPECT_FALSE(std::filesystem::is_empty(dir));
  const auto b = SpectralDecomposition::diagonalize_cached(ShiftedHermite{0}, d);
  EXPECT_EQ(a.eigenvalues(), b.eigenvalues());
  unsetenv("STABCERT_CACHE_DIR");
  std::filesystem::remove_all(dir);
}
