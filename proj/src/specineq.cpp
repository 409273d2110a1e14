#include "stabcert/specineq.hpp"

#include <cmath>
#include <limits>

namespace stabcert {

namespace {
constexpr double kSingular = 1e-12;
}

int max_resolvable_k(const SpectralDecomposition& dec) {
  const auto& ev = dec.eigenvalues();
  const std::size_t half = dec.size() / 2;
  // count_at_most(k) <= half  <=>  k < ev[half].
  return static_cast<int>(std::ceil(ev[half])) - 1;
}

Eigen::MatrixXd restricted_gram(const SpectralDecomposition& dec,
                                std::size_t count, const SetIndicator& e) {
  require_same_domain(dec.domain(), e.domain());
  const Eigen::MatrixXd V = dec.modes(count);
  Eigen::MatrixXd VE(static_cast<Eigen::Index>(e.count()),
                     static_cast<Eigen::Index>(count));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < dec.size(); ++c)
    if (e.contains(c)) VE.row(row++) = V.row(static_cast<Eigen::Index>(c));
  Eigen::MatrixXd G = VE.transpose() * VE;
  G *= dec.domain().cell_volume();
  return G;
}

BestConstant best_constant(const SpectralDecomposition& dec, double k,
                           const SetIndicator& e) {
  require_same_domain(dec.domain(), e.domain());
  BestConstant out;
  out.k = k;
  out.dimension = dec.count_at_most(k);
  if (out.dimension == 0) return out;
  if (out.dimension > dec.size() / 2)
    fail(ErrorCode::kResolution,
         "projection rank " + std::to_string(out.dimension) +
             " exceeds half the cell count; refine the grid or lower k");

  const std::size_t inside = e.count();
  const Eigen::MatrixXd V = dec.modes(out.dimension);
  Eigen::MatrixXd VE(static_cast<Eigen::Index>(inside), V.cols());
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < dec.size(); ++c)
    if (e.contains(c)) VE.row(row++) = V.row(static_cast<Eigen::Index>(c));
  const double h = dec.domain().cell_volume();

  Eigen::MatrixXd G;
  if (dec.size() - inside < inside) {
    // Fewer cells outside E: subtract the complement's Gram from the
    // identity, which is exact for E = full.
    Eigen::MatrixXd VC(static_cast<Eigen::Index>(dec.size() - inside), V.cols());
    row = 0;
    for (std::size_t c = 0; c < dec.size(); ++c)
      if (!e.contains(c)) VC.row(row++) = V.row(static_cast<Eigen::Index>(c));
    G = -(VC.transpose() * VC) * h;
    G.diagonal().array() += 1.0;
  } else {
    G = VE.transpose() * VE * h;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::kNumerical, "Gram eigen-decomposition failed");
  out.witness = solver.eigenvectors().col(0);
  out.mu_min = solver.eigenvalues()(0);
  // The eigenvalue carries absolute error ~ eps; the Rayleigh quotient of
  // the witness keeps relative accuracy when mu_min is tiny.
  if (inside < dec.size())
    out.mu_min = (VE * out.witness).squaredNorm() * h /
                 out.witness.squaredNorm();
  out.constant = out.mu_min <= kSingular
                     ? std::numeric_limits<double>::infinity()
                     : 1.0 / std::sqrt(out.mu_min);
  return out;
}

bool SpectralConstantCurve::all_finite() const {
  for (double c : constants)
    if (!std::isfinite(c)) return false;
  return true;
}

SpectralConstantCurve spectral_constant_curve(
    const SpectralDecomposition& dec, const SetIndicator& e,
    const std::vector<double>& thresholds) {
  SpectralConstantCurve curve;
  for (double k : thresholds) {
    curve.thresholds.push_back(k);
    curve.constants.push_back(best_constant(dec, k, e).constant);
  }
  return curve;
}

GrowthFit fit_growth(const SpectralConstantCurve& curve, GrowthModel model,
                     double exponent) {
  std::vector<double> ks, ys;
  for (std::size_t i = 0; i < curve.constants.size(); ++i) {
    const double k = curve.thresholds[i];
    const double c = curve.constants[i];
    if (k > 0.0 && std::isfinite(c)) {
      ks.push_back(k);
      ys.push_back(std::log(c));
    }
  }
  if (ks.size() < 4)
    fail(ErrorCode::kUnverifiable,
         "growth fit needs at least 4 finite constants");

  GrowthFit fit;
  fit.model = model;
  fit.points = ks.size();
  std::vector<double> basis(ks.size()), target(ks.size());
  if (model == GrowthModel::kExpPower) {
    require(exponent > 0.0, "exponent must be positive");
    fit.exponent = exponent;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      basis[i] = std::pow(ks[i], exponent);
      target[i] = ys[i];
    }
  } else {
    require(exponent >= 1.0, "dimension must be positive");
    fit.exponent = exponent / 2.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      basis[i] = ks[i];
      target[i] = ys[i] - fit.exponent * ks[i] * std::log(ks[i]);
    }
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += basis[i] * target[i];
    sxx += basis[i] * basis[i];
  }
  fit.coefficient = sxy / sxx;
  double res = 0.0, sig = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double r = target[i] - fit.coefficient * basis[i];
    res += r * r;
    sig += ys[i] * ys[i];
  }
  fit.residual = std::sqrt(res / ks.size());
  fit.signal = std::sqrt(sig / ks.size());
  return fit;
}

HypothesisReport verify_spectral_hypothesis(const SpectralDecomposition& dec,
                                            const SetIndicator& e, int k_max,
                                            double c1, double a) {
  require(c1 > 0.0 && a > 0.0, "c1 and a must be positive");
  require(k_max >= 1, "k_max must be at least 1");
  HypothesisReport r;
  r.c1 = c1;
  r.a = a;
  r.k_max = k_max;
  r.holds = true;
  r.worst_ratio = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    const double c = best_constant(dec, k, e).constant;
    r.constants.push_back(c);
    const double ratio = std::isfinite(c)
                             ? std::exp(std::log(c) - c1 * std::pow(k, a))
                             : std::numeric_limits<double>::infinity();
    if (ratio > r.worst_ratio || r.worst_k == 0) {
      r.worst_ratio = ratio;
      r.worst_k = k;
    }
    if (!(ratio <= 1.0)) r.holds = false;
  }
  return r;
}

}  // namespace stabcert
