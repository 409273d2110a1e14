#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"

namespace stabcert {

struct SimpsonOptions {
  int min_subintervals = 64;
  int max_subintervals = 1 << 14;
  // Doubling stops once the relative change drops below this.
  double rel_tol = 1e-9;
};

struct QuadratureResult {
  Eigen::VectorXd value;
  long evaluations = 0;
  bool converged = true;
  // Largest relative change at the last doubling of any piece.
  double rel_change = 0.0;
};

using VectorIntegrand = std::function<Eigen::VectorXd(double)>;

// Composite Simpson with n (even) subintervals.
Eigen::VectorXd simpson(const VectorIntegrand& f, double a, double b, int n);

// Composite Simpson on [a, b] split into dyadic pieces accumulating at a:
// [a + L 2^{-j-1}, a + L 2^{-j}] for j < levels plus [a, a + L 2^{-levels}],
// L = b - a. Each piece doubles its subinterval count until converged. The
// number of levels is chosen so the innermost piece satisfies
// length * stiffness <= 1e-3, where stiffness bounds the integrand's decay
// rate. This keeps stiff exponentials (large eigenvalues) resolved.
QuadratureResult integrate_graded(const VectorIntegrand& f, double a,
                                  double b, double stiffness,
                                  const SimpsonOptions& options = {});

// Time-integrated observation through the exact eigenbasis Gramian.
//
// For f = sum_j c_j v_j,
//   int_{t0}^{t1} ||e^{-t(H + shift)} f||^2_{L2(E)} dt = c^T (G_E o W) c
// with G_E the E-restricted Gram matrix of all eigenvectors and
// W_ij = int_{t0}^{t1} e^{-t(lambda_i + lambda_j + 2 shift)} dt.
class ObservationGramian {
 public:
  // Largest basis for which the full Gram matrix is formed.
  static constexpr std::size_t kMaxSize = 2048;
  static bool feasible(const SpectralDecomposition& dec) {
    return dec.size() <= kMaxSize;
  }

  ObservationGramian(const SpectralDecomposition& dec, const SetIndicator& e);

  // G_E o W for one time interval.
  Eigen::MatrixXd interval_matrix(double t0, double t1, double shift) const;
  double evaluate(const Eigen::VectorXd& c, double t0, double t1,
                  double shift) const;

  const Eigen::MatrixXd& gram() const { return gram_; }

 private:
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd gram_;
};

// The same integral by graded Simpson through the semigroup.
QuadratureResult observation_simpson(const SpectralDecomposition& dec,
                                     const SetIndicator& e,
                                     const Eigen::VectorXd& c, double t0,
                                     double t1, double shift,
                                     const SimpsonOptions& options = {});

// Per-cell density x -> int_{t0}^{t1} |(e^{-t(H + shift)} f)(x)|^2 dt, so the
// observation over any set is the sum of the density over its cells times
// h^n.
QuadratureResult observation_density(const SpectralDecomposition& dec,
                                     const Eigen::VectorXd& c, double t0,
                                     double t1, double shift,
                                     const SimpsonOptions& options = {});

// Evaluates int_{t0}^{t1} ||e^{-t(H + shift)} f||^2_{L2(E)} dt for many f:
// through the Gramian when the basis is small enough, by graded Simpson
// otherwise.
class ObservationIntegrator {
 public:
  ObservationIntegrator(const SpectralDecomposition& dec,
                        const SetIndicator& e);

  bool exact() const { return gramian_.has_value(); }
  void set_interval(double t0, double t1, double shift);
  // Eigenbasis coefficients in.
  double value(const Eigen::VectorXd& c) const;
  double simpson(const Eigen::VectorXd& c) const;

 private:
  SpectralDecomposition dec_;
  SetIndicator e_;
  std::optional<ObservationGramian> gramian_;
  Eigen::MatrixXd interval_;
  double t0_ = 0.0, t1_ = 0.0, shift_ = 0.0;
};

// int_{t0}^{t1} e^{-t mu} dt, stable for mu near zero and negative mu.
inline double exp_integral(double mu, double t0, double t1) {
  const double len = t1 - t0;
  const double x = mu * len;
  const double scale = std::exp(-t0 * mu);
  if (std::abs(x) < 1e-8) return scale * len * (1.0 - 0.5 * x);
  return scale * (-std::expm1(-x)) / mu;
}

}  // namespace stabcert
