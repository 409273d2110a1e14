#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"
#include "stabcert/specineq.hpp"

namespace stabcert {

// Hypothesis constants: the spectral inequality
//   ||pi_k f|| <= e^{c1 k^a} ||pi_k f||_{L2(E)},
// the dissipative inequality
//   ||(1 - pi_k) e^{-tH} f|| <= M e^{-c2 t k^b} ||f||,
// and the shift delta0 making ||e^{-t(H + delta0)}|| <= M.
struct CriterionConstants {
  double c1 = 1.0;
  double a = 1.0;
  double c2 = 1.0;
  double b = 1.0;
  double M = 1.0;
  double delta0 = 0.0;
};

void validate(const CriterionConstants& k);

// Every constant of the telescoping construction plus the final weak
// observability triple (T, alpha, C):
//   ||e^{-TH} f|| <= C (int_0^T ||e^{-tH} f||^2_{L2(E)} dt)^{1/2}
//                    + alpha ||f||.
//
// Each quantity is kept in log-space (log_*) because A, alpha0, B and C
// routinely leave double range; the linear fields hold exp(log_*) and may be
// 0 or inf.
struct Certificate {
  double gamma = 0.0;
  double N = 0.0;
  double CMgamma = 0.0;
  double DMN = 0.0;
  double A = 0.0;
  double tau0 = 0.0;
  double alpha0 = 0.0;
  double B = 0.0;
  double beta = 0.0;
  double T = 0.0;
  double alpha = 0.0;
  double C = 0.0;

  double log_gamma = 0.0;
  double log_N = 0.0;
  double log_CMgamma = 0.0;
  double log_DMN = 0.0;
  double log_A = 0.0;
  double log_tau0 = 0.0;
  double log_alpha0 = 0.0;
  double log_B = 0.0;
  double log_beta = 0.0;
  double log_T = 0.0;
  double log_alpha = 0.0;
  double log_C = 0.0;

  CriterionConstants constants;
};

Certificate build_certificate(const CriterionConstants& k);

// k(tau) = [(A/tau)^{1/b}], the frequency cut used at time scale tau.
long frequency_cut(const CriterionConstants& k, double A, double tau);
// ln g(tau), g(tau) = tau / (4 M^2) exp{-2 c1 k(tau)^a}.
double log_g(const CriterionConstants& k, double A, double tau);
// beta evaluated directly in double arithmetic (no log-space); inf or 0 when
// intermediate quantities leave double range.
double beta_linear(const CriterionConstants& k);

// A weak observability claim (C, T, alpha); alpha = 0 is the full
// observability inequality.
struct ObservabilityClaim {
  double C = 1.0;
  double T = 1.0;
  double alpha = 0.0;
};

ObservabilityClaim claim_of(const Certificate& cert);

struct RecurrenceSample {
  double tau = 0.0;
  long k_tau = 0;
  // max over trials of LHS - RHS (<= 0 means the inequality held).
  double max_excess = 0.0;
  int violations = 0;
};

struct RecurrenceReport {
  std::vector<RecurrenceSample> samples;
  int trials = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  int violations = 0;
  // Largest relative gap between the Gramian and Simpson evaluations of the
  // time integral on the cross-checked trials.
  double quadrature_discrepancy = 0.0;
};

// Checks, for random unit f and each tau in (0, tau0),
//   g(tau) ||e^{-tau H~} f||^2 - g(tau/2) ||f||^2
//     <= int_{tau/2}^{tau} ||e^{-t H~} f||^2_{L2(E)} dt + alpha0 tau ||f||^2
// with H~ = H + delta0.
RecurrenceReport recurrence_check(const SpectralDecomposition& dec,
                                  const SetIndicator& e,
                                  const Certificate& cert,
                                  const std::vector<double>& taus, int trials,
                                  std::uint64_t seed);

struct ObservabilityReport {
  ObservabilityClaim claim;
  int trials = 0;
  std::uint64_t seed = 0;
  // min over trials of RHS - LHS.
  double min_slack = 0.0;
  int worst_trial = -1;
  int violations = 0;
  double tolerance = 0.0;
  double quadrature_discrepancy = 0.0;
};

// Random unit f: ||e^{-TH} f|| vs C (int_0^T ||e^{-tH} f||^2_E)^{1/2} + alpha.
// A trial is a violation when RHS - LHS < -tolerance * max(1, LHS).
ObservabilityReport weak_observability_check(const SpectralDecomposition& dec,
                                             const SetIndicator& e,
                                             const ObservabilityClaim& claim,
                                             int trials, std::uint64_t seed);

// Same inequality for explicit initial states (eigenmodes, probes).
ObservabilityReport weak_observability_check(
    const SpectralDecomposition& dec, const SetIndicator& e,
    const ObservabilityClaim& claim, const std::vector<GridFunction>& states);

struct CertifyOptions {
  int k_max = 10;
  int trials = 1000;
  int recurrence_trials = 500;
  int tau_count = 8;
  std::uint64_t seed = 0;
  // Exponent a of the spectral inequality. Defaults to 1/s for the
  // fractional kind and 1 otherwise.
  std::optional<double> a;
  // Multiplies the fitted c1.
  double safety_factor = 1.1;
};

enum class CertifyStatus { kCertified, kHypothesisUnverifiable, kCheckFailed };

std::string to_string(CertifyStatus s);

struct CertifyResult {
  CertifyStatus status = CertifyStatus::kHypothesisUnverifiable;
  std::string message;
  SpectralConstantCurve curve;
  std::optional<CriterionConstants> constants;
  std::optional<HypothesisReport> hypothesis;
  std::optional<DissipativeReport> dissipative;
  std::optional<Certificate> certificate;
  std::optional<RecurrenceReport> recurrence;
  std::optional<ObservabilityReport> observability;
};

// Fits (c1, a) from the spectral constants, takes (c2, b, M) = (1, 1, 1) and
// delta0 = max(0, -lambda_1), builds the certificate and validates it.
CertifyResult certify_end_to_end(const SpectralDecomposition& dec,
                                 const SetIndicator& e,
                                 const CertifyOptions& options);

}  // namespace stabcert
