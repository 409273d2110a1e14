#include "stabcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "stabcert/quadrature.hpp"

namespace stabcert {

namespace {

constexpr double kLn2 = std::numbers::ln2;
// Quadrature error budget for the inequality checks, relative.
constexpr double kCheckTolerance = 1e-7;
// Trials cross-checked by Simpson when the Gramian is used.
constexpr int kCrossChecked = 3;

double log_add(double x, double y) {
  const double hi = std::max(x, y), lo = std::min(x, y);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

// ln(1 + e^x) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

long cut_from_ratio(double ratio, double b) {
  double r = std::pow(ratio, 1.0 / b);
  const double nearest = std::round(r);
  // Integer ratios produced by division must not fall one below.
  if (std::abs(r - nearest) <= 1e-12 * std::max(1.0, r)) r = nearest;
  return static_cast<long>(std::floor(r));
}

double log_g_from_cut(const CriterionConstants& k, double tau, long cut) {
  if (cut < 1)
    fail(ErrorCode::kNumerical, "frequency cut k(tau) must be a positive integer");
  return std::log(tau) - std::log(4.0) - 2.0 * std::log(k.M) -
         2.0 * k.c1 * std::pow(static_cast<double>(cut), k.a);
}

double safe_exp(double x) { return std::exp(x); }

}  // namespace

void validate(const CriterionConstants& k) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(positive(k.c1), "c1 must be positive");
  require(positive(k.a), "a must be positive");
  require(positive(k.c2), "c2 must be positive");
  require(positive(k.b), "b must be positive");
  require(std::isfinite(k.M) && k.M >= 1.0, "M must be at least 1");
  require(std::isfinite(k.delta0) && k.delta0 >= 0.0,
          "delta0 must be nonnegative");
}

long frequency_cut(const CriterionConstants& k, double A, double tau) {
  require(tau > 0.0, "tau must be positive");
  return cut_from_ratio(A / tau, k.b);
}

double log_g(const CriterionConstants& k, double A, double tau) {
  return log_g_from_cut(k, tau, frequency_cut(k, A, tau));
}

Certificate build_certificate(const CriterionConstants& k) {
  validate(k);
  Certificate c;
  c.constants = k;
  const double lnM = std::log(k.M);

  c.log_gamma = (k.a / k.b + k.a) * kLn2;
  c.gamma = safe_exp(c.log_gamma);

  c.N = std::max(2.0, std::pow(2.0, k.b + 2.0) * k.delta0 / k.c2);
  c.log_N = std::log(c.N);

  // C(M, gamma) = M^2 + (gamma - 1)/(8 M^2) (4 M^4 / gamma)^{gamma/(gamma-1)}
  const double g = c.gamma;
  const double second = std::log(g - 1.0) - std::log(8.0) - 2.0 * lnM +
                        g / (g - 1.0) *
                            (std::log(4.0) + 4.0 * lnM - c.log_gamma);
  c.log_CMgamma = log_add(2.0 * lnM, second);
  c.CMgamma = safe_exp(c.log_CMgamma);

  // D(M, N) = e^{-2 c1 (2N)^{a/b}} / (8 M^2 N)
  const double spread = 2.0 * k.c1 * std::pow(2.0 * c.N, k.a / k.b);
  c.log_DMN = -spread - std::log(8.0) - 2.0 * lnM - c.log_N;
  c.DMN = safe_exp(c.log_DMN);

  // A = (2^{b+1} / c2) ln(1 + 25 C / D)
  const double log_ratio = std::log(25.0) + c.log_CMgamma - c.log_DMN;
  c.A = std::pow(2.0, k.b + 1.0) / k.c2 * softplus(log_ratio);
  c.log_A = std::log(c.A);

  c.tau0 = 3.0 * c.A / (2.0 * c.N);
  c.log_tau0 = std::log(c.tau0);

  const double half_decay = k.c2 * std::pow(2.0, -(k.b + 1.0)) * c.A;
  c.log_alpha0 = c.log_DMN - half_decay - std::log(50.0);
  c.alpha0 = safe_exp(c.log_alpha0);

  c.log_B = -k.c2 * std::pow(2.0, -k.b) * c.A - kLn2;
  c.B = safe_exp(c.log_B);

  const double shift_growth = 2.0 * c.A * k.delta0 / c.N;
  c.log_beta = std::log(8.0) + c.log_N + 2.0 * lnM + c.log_alpha0 +
               c.log_tau0 - c.log_A + spread + shift_growth;
  c.beta = safe_exp(c.log_beta);
  if (!(c.log_beta < 0.0) || !std::isfinite(c.log_beta))
    fail(ErrorCode::kNumerical,
         "beta outside (0, 1): the constant chain is inconsistent");

  c.T = c.A / c.N;
  c.log_T = std::log(c.T);
  c.log_alpha = 0.5 * c.log_beta;
  c.alpha = safe_exp(c.log_alpha);

  const double tau = c.A / (2.0 * c.N);
  const long cut = cut_from_ratio(2.0 * c.N, k.b);
  c.log_C = 0.5 * (shift_growth - log_g_from_cut(k, tau, cut));
  c.C = safe_exp(c.log_C);
  return c;
}

double beta_linear(const CriterionConstants& k) {
  validate(k);
  const double gamma = std::pow(2.0, k.a / k.b + k.a);
  const double N = std::max(2.0, std::pow(2.0, k.b + 2.0) * k.delta0 / k.c2);
  const double M2 = k.M * k.M;
  const double CM = M2 + (gamma - 1.0) / (8.0 * M2) *
                             std::pow(4.0 * M2 * M2 / gamma,
                                      gamma / (gamma - 1.0));
  const double D = std::exp(-2.0 * k.c1 * std::pow(2.0 * N, k.a / k.b)) /
                   (8.0 * M2 * N);
  const double A =
      std::pow(2.0, k.b + 1.0) / k.c2 * std::log1p(25.0 * CM / D);
  const double tau0 = 3.0 * A / (2.0 * N);
  const double alpha0 =
      D * std::exp(-k.c2 * std::pow(2.0, -(k.b + 1.0)) * A) / 50.0;
  return (8.0 * N * M2 * alpha0 * tau0 / A) *
         std::exp(2.0 * k.c1 * std::pow(2.0 * N, k.a / k.b) +
                  2.0 * A * k.delta0 / N);
}

ObservabilityClaim claim_of(const Certificate& cert) {
  return {cert.C, cert.T, cert.alpha};
}

namespace {

double relative_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b),
                                 std::numeric_limits<double>::min()});
  return std::abs(a - b) / scale;
}

double evolved_norm_sq(const SpectralDecomposition& dec,
                       const Eigen::VectorXd& c, double t, double shift) {
  const auto& ev = dec.eigenvalues();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double v = std::exp(-t * (ev[j] + shift)) * c(j);
    sum += v * v;
  }
  return sum;
}

}  // namespace

RecurrenceReport recurrence_check(const SpectralDecomposition& dec,
                                  const SetIndicator& e,
                                  const Certificate& cert,
                                  const std::vector<double>& taus, int trials,
                                  std::uint64_t seed) {
  require_same_domain(dec.domain(), e.domain());
  require(trials >= 1, "trials must be positive");
  const CriterionConstants& k = cert.constants;
  for (double tau : taus)
    require(tau > 0.0 && tau < cert.tau0, "tau must lie in (0, tau0)");

  RecurrenceReport report;
  report.trials = trials;
  report.seed = seed;
  report.tolerance = kCheckTolerance;

  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> states;
  states.reserve(trials);
  for (int i = 0; i < trials; ++i)
    states.push_back(dec.coefficients(random_unit(dec.domain(), rng)));

  ObservationIntegrator engine(dec, e);
  for (double tau : taus) {
    RecurrenceSample sample;
    sample.tau = tau;
    sample.k_tau = frequency_cut(k, cert.A, tau);
    sample.max_excess = -std::numeric_limits<double>::infinity();
    const double g_full = std::exp(log_g(k, cert.A, tau));
    const double g_half = std::exp(log_g(k, cert.A, tau / 2.0));
    engine.set_interval(tau / 2.0, tau, k.delta0);
    for (int i = 0; i < trials; ++i) {
      const Eigen::VectorXd& c = states[i];
      const double norm_sq = c.squaredNorm();
      const double obs = engine.value(c);
      if (engine.exact() && i < kCrossChecked)
        report.quadrature_discrepancy = std::max(
            report.quadrature_discrepancy, relative_gap(obs, engine.simpson(c)));
      const double lhs =
          g_full * evolved_norm_sq(dec, c, tau, k.delta0) - g_half * norm_sq;
      const double rhs = obs + cert.alpha0 * tau * norm_sq;
      const double excess = lhs - rhs;
      const double scale = g_half * norm_sq + std::abs(rhs);
      sample.max_excess = std::max(sample.max_excess, excess);
      if (excess > kCheckTolerance * scale) ++sample.violations;
    }
    report.violations += sample.violations;
    report.samples.push_back(sample);
  }
  return report;
}

namespace {

ObservabilityReport observability_over(const SpectralDecomposition& dec,
                                       const SetIndicator& e,
                                       const ObservabilityClaim& claim,
                                       const std::vector<Eigen::VectorXd>& cs) {
  require_same_domain(dec.domain(), e.domain());
  require(claim.T > 0.0, "claim T must be positive");
  require(claim.C >= 0.0 && claim.alpha >= 0.0,
          "claim C and alpha must be nonnegative");
  ObservabilityReport report;
  report.claim = claim;
  report.trials = static_cast<int>(cs.size());
  report.tolerance = kCheckTolerance;
  report.min_slack = std::numeric_limits<double>::infinity();

  ObservationIntegrator engine(dec, e);
  engine.set_interval(0.0, claim.T, 0.0);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Eigen::VectorXd& c = cs[i];
    const double obs = std::max(0.0, engine.value(c));
    if (engine.exact() && static_cast<int>(i) < kCrossChecked)
      report.quadrature_discrepancy = std::max(
          report.quadrature_discrepancy, relative_gap(obs, engine.simpson(c)));
    const double lhs = std::sqrt(evolved_norm_sq(dec, c, claim.T, 0.0));
    const double rhs = claim.C * std::sqrt(obs) + claim.alpha * c.norm();
    const double slack = std::isnan(rhs) ? std::numeric_limits<double>::infinity()
                                         : rhs - lhs;
    if (slack < report.min_slack) {
      report.min_slack = slack;
      report.worst_trial = static_cast<int>(i);
    }
    if (slack < -kCheckTolerance * std::max(1.0, lhs)) ++report.violations;
  }
  return report;
}

}  // namespace

ObservabilityReport weak_observability_check(const SpectralDecomposition& dec,
                                             const SetIndicator& e,
                                             const ObservabilityClaim& claim,
                                             int trials, std::uint64_t seed) {
  require(trials >= 1, "trials must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> cs;
  cs.reserve(trials);
  for (int i = 0; i < trials; ++i)
    cs.push_back(dec.coefficients(random_unit(dec.domain(), rng)));
  auto report = observability_over(dec, e, claim, cs);
  report.seed = seed;
  return report;
}

ObservabilityReport weak_observability_check(
    const SpectralDecomposition& dec, const SetIndicator& e,
    const ObservabilityClaim& claim, const std::vector<GridFunction>& states) {
  require(!states.empty(), "no initial states given");
  std::vector<Eigen::VectorXd> cs;
  for (const auto& f : states) cs.push_back(dec.coefficients(f));
  return observability_over(dec, e, claim, cs);
}

std::string to_string(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::kCertified:
      return "certified";
    case CertifyStatus::kHypothesisUnverifiable:
      return "hypothesis unverifiable";
    case CertifyStatus::kCheckFailed:
      return "check failed";
  }
  return "unknown";
}

CertifyResult certify_end_to_end(const SpectralDecomposition& dec,
                                 const SetIndicator& e,
                                 const CertifyOptions& options) {
  require_same_domain(dec.domain(), e.domain());
  require(options.k_max >= 1, "k_max must be at least 1");
  require(options.tau_count >= 1, "tau_count must be at least 1");
  CertifyResult result;

  const auto* frac = std::get_if<FractionalLaplacian>(&dec.spec());
  const double a = options.a.value_or(frac ? 1.0 / frac->s : 1.0);
  require(a > 0.0, "exponent a must be positive");

  int k_max = options.k_max;
  const int resolvable = max_resolvable_k(dec);
  if (k_max > resolvable) {
    k_max = resolvable;
    result.message = "k_max lowered to the grid's resolvable limit " +
                     std::to_string(k_max) + "; ";
  }
  if (k_max < 1) {
    result.status = CertifyStatus::kHypothesisUnverifiable;
    result.message += "grid resolves no positive threshold";
    return result;
  }

  std::vector<double> ks;
  for (int k = 1; k <= k_max; ++k) ks.push_back(k);
  result.curve = spectral_constant_curve(dec, e, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!std::isfinite(result.curve.constants[i])) {
      result.status = CertifyStatus::kHypothesisUnverifiable;
      result.message += "hypothesis unverifiable: spectral constant is "
                        "infinite at k = " +
                        std::to_string(static_cast<int>(ks[i]));
      return result;
    }
  }

  // c1 must dominate every measured ln C(k) / k^a, not only the fit.
  double needed = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i)
    needed = std::max(needed,
                      std::log(result.curve.constants[i]) / std::pow(ks[i], a));
  double fitted = 0.0;
  if (ks.size() >= 4) {
    result.curve.fit = fit_growth(result.curve, GrowthModel::kExpPower, a);
    fitted = result.curve.fit->coefficient;
  }
  const double c1 = options.safety_factor * std::max({fitted, needed, 0.01});

  CriterionConstants constants;
  constants.c1 = c1;
  constants.a = a;
  constants.c2 = 1.0;
  constants.b = 1.0;
  constants.M = 1.0;
  constants.delta0 = std::max(0.0, -dec.eigenvalues().front());
  result.constants = constants;

  result.hypothesis = verify_spectral_hypothesis(dec, e, k_max, c1, a);
  if (!result.hypothesis->holds) {
    result.status = CertifyStatus::kHypothesisUnverifiable;
    result.message += "spectral hypothesis fails at k = " +
                      std::to_string(result.hypothesis->worst_k);
    return result;
  }

  DissipativeReport worst;
  for (int k = 1; k <= k_max; ++k) {
    auto r = dissipative_margin(dec, k, {0.1, 0.5, 1.0}, 20,
                                options.seed + static_cast<std::uint64_t>(k));
    if (k == 1 || r.max_ratio > worst.max_ratio) worst = r;
  }
  result.dissipative = worst;
  if (worst.max_ratio > 1.0 + 1e-10) {
    result.status = CertifyStatus::kHypothesisUnverifiable;
    result.message += "dissipative hypothesis fails with M = 1";
    return result;
  }

  const Certificate cert = build_certificate(constants);
  result.certificate = cert;

  // Keep k(tau) within the verified thresholds: tau > A / (k_max + 1).
  const double lo = cert.A / std::pow(k_max + 1.0, constants.b);
  const double hi = cert.tau0;
  std::vector<double> taus;
  for (int i = 0; i < options.tau_count; ++i)
    taus.push_back(lo * std::pow(hi / lo, (i + 0.5) / options.tau_count));
  result.recurrence = recurrence_check(dec, e, cert, taus,
                                       options.recurrence_trials, options.seed);
  result.observability = weak_observability_check(
      dec, e, claim_of(cert), options.trials, options.seed + 1);

  if (result.recurrence->violations > 0 ||
      result.observability->violations > 0) {
    result.status = CertifyStatus::kCheckFailed;
    result.message += "certificate checks found violations";
    return result;
  }
  result.status = CertifyStatus::kCertified;
  result.message += "certificate produced and validated";
  return result;
}

}  // namespace stabcert
