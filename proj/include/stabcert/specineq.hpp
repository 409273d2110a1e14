#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"

namespace stabcert {

// Best constant C(k, E) in ||pi_k f|| <= C(k, E) ||pi_k f||_{L2(E)}.
struct BestConstant {
  double k = 0.0;
  // Rank of pi_k.
  std::size_t dimension = 0;
  // Smallest eigenvalue of the restricted Gram matrix.
  double mu_min = 1.0;
  // 1 / sqrt(mu_min), or +infinity when mu_min <= 1e-12.
  double constant = 1.0;
  // Minimizing eigenvector of the Gram matrix, in eigenbasis coordinates of
  // range(pi_k).
  Eigen::VectorXd witness;
};

// Largest integer k whose projection rank stays within half the cell count.
int max_resolvable_k(const SpectralDecomposition& dec);

// Throws ErrorCode::kResolution when rank(pi_k) exceeds half the cell count.
BestConstant best_constant(const SpectralDecomposition& dec, double k,
                           const SetIndicator& e);

// E-restricted Gram matrix of the first `count` eigenvectors:
// G[i][j] = sum over cells of E of v_i v_j h^n.
Eigen::MatrixXd restricted_gram(const SpectralDecomposition& dec,
                                std::size_t count, const SetIndicator& e);

enum class GrowthModel {
  // ln C = c1 k^a with a fixed.
  kExpPower,
  // ln C = (n/2) k ln k + linear k.
  kKLogK,
};

struct GrowthFit {
  GrowthModel model = GrowthModel::kExpPower;
  // ExpPower: exponent a (fixed input). KLogK: n/2.
  double exponent = 1.0;
  // ExpPower: c1. KLogK: linear coefficient.
  double coefficient = 0.0;
  // Root-mean-square residual of the fit in ln C.
  double residual = 0.0;
  // Root-mean-square of ln C itself, for scale.
  double signal = 0.0;
  std::size_t points = 0;
};

struct SpectralConstantCurve {
  std::vector<double> thresholds;
  std::vector<double> constants;
  std::optional<GrowthFit> fit;

  bool all_finite() const;
};

SpectralConstantCurve spectral_constant_curve(
    const SpectralDecomposition& dec, const SetIndicator& e,
    const std::vector<double>& thresholds);

// Least squares through the origin. `exponent` is a for kExpPower and the
// dimension n for kKLogK. Needs at least 4 finite constants.
GrowthFit fit_growth(const SpectralConstantCurve& curve, GrowthModel model,
                     double exponent);

struct HypothesisReport {
  bool holds = false;
  double c1 = 0.0;
  double a = 0.0;
  int k_max = 0;
  // max over k of C(k, E) / e^{c1 k^a}.
  double worst_ratio = 0.0;
  int worst_k = 0;
  std::vector<double> constants;
};

// Checks C(k, E) <= e^{c1 k^a} for every integer k in [1, k_max].
HypothesisReport verify_spectral_hypothesis(const SpectralDecomposition& dec,
                                            const SetIndicator& e, int k_max,
                                            double c1, double a);

}  // namespace stabcert
