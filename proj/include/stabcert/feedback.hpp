#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"

namespace stabcert {

// omega(N) = min{(1 - delta) N^2 - 2, e^{-2 c1 N} / 2}.
double damping_omega(double delta, double c1, int n);

struct DampingBound {
  double omega = 0.0;
  int chosen_n = 0;
  double c1 = 0.0;
  std::vector<int> tested_n;
  std::vector<double> omegas;
};

// Maximizes omega(N) over N in [n_min, n_max]. Throws kUnverifiable when no
// N gives omega > 0.
DampingBound damping_decay_bound(double delta, double c1, int n_min,
                                 int n_max);

// Same, with c1 = max over N in [1, n_max] of ln C(N, E) / N measured on a
// (-Laplacian)^{1/2} decomposition (FractionalLaplacian{1, 0}).
DampingBound damping_decay_bound(const SpectralDecomposition& half_laplacian,
                                 const SetIndicator& e, double delta,
                                 int n_min, int n_max);

// Smallest eigenvalue of H + chi_E by dense diagonalization.
double damped_min_eigenvalue(const SpectralDecomposition& dec,
                             const SetIndicator& e);

struct DampingFeedback {
  SetIndicator e;
};

// K psi = rho sum_i (A^{-1} c)_i phi_i with c_i = (psi, phi_i) over the
// unstable eigenfunctions phi_1..phi_N (lambda_j <= 0), A the E-restricted
// Gram matrix of those eigenfunctions and rho = lambda_1 - 1. The closed loop
// is y' = -H y + chi_E K y.
struct FiniteRankFeedback {
  SetIndicator e;
  double rho = 0.0;
  std::size_t unstable_count = 0;
  std::vector<double> eigenvalues;
  // cells x N, discrete-orthonormal columns.
  Eigen::MatrixXd eigenfunctions;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd gram_inverse;
  double condition_number = 1.0;

  GridFunction apply(const GridFunction& psi) const;
  // |rho| ||A^{-1}||_2.
  double norm_bound() const;
};

using FeedbackOperator = std::variant<DampingFeedback, FiniteRankFeedback>;

// Throws kAlreadyStable without unstable modes and kSingularGram when the
// Gram matrix condition number exceeds 1e12.
FiniteRankFeedback build_finite_rank_feedback(const SpectralDecomposition& dec,
                                              const SetIndicator& e);

// Precomputed closed-loop propagator.
//
// FiniteRank: exponential Runge-Kutta of order two (ETD2RK) in eigenbasis
// coordinates; the linear part -H is integrated exactly and the bounded
// feedback term explicitly. Steps are subdivided so dt ||K|| <= 0.1.
// Damping: exact flow of the time-independent H + chi_E from one dense
// diagonalization.
class ClosedLoop {
 public:
  ClosedLoop(const SpectralDecomposition& dec, const FeedbackOperator& fb);

  GridFunction step(const GridFunction& y, double dt) const;
  Eigen::VectorXd step_coefficients(const Eigen::VectorXd& c,
                                    double dt) const;

  const SpectralDecomposition& decomposition() const { return dec_; }
  bool is_damping() const { return damping_; }

 private:
  Eigen::VectorXd forcing(const Eigen::VectorXd& c) const;
  Eigen::VectorXd etd2rk(const Eigen::VectorXd& c, double dt) const;

  SpectralDecomposition dec_;
  bool damping_ = false;
  // FiniteRank: column i holds the eigenbasis coefficients of
  // rho chi_E (A^{-1} row combination), so forcing(c) = P c[0:N].
  Eigen::MatrixXd forcing_matrix_;
  std::size_t unstable_count_ = 0;
  double substep_ = 0.0;
  // Damping: eigenpairs of H + chi_E in the cell basis.
  Eigen::VectorXd damped_values_;
  Eigen::MatrixXd damped_vectors_;
};

GridFunction closed_loop_step(const SpectralDecomposition& dec,
                              const FeedbackOperator& fb,
                              const GridFunction& y, double dt);

struct DecayReport {
  std::vector<double> times;
  std::vector<double> norms;
  // Least-squares fit of ln||y(t)|| = ln(prefactor) - omega t over the second
  // half of the samples.
  double fitted_omega = 0.0;
  double fitted_prefactor = 0.0;
  double fit_residual = 0.0;
  // Norms never increase over the fitted window.
  bool monotone_tail = false;
  double t_end = 0.0;
  double dt = 0.0;
  int steps_per_sample = 1;
};

// Throws kInstability once ||y|| exceeds 10 ||y0||.
DecayReport simulate_decay(const ClosedLoop& loop, const GridFunction& y0,
                           double t_end, double dt);
DecayReport simulate_decay(const SpectralDecomposition& dec,
                           const FeedbackOperator& fb, const GridFunction& y0,
                           double t_end, double dt);

}  // namespace stabcert
