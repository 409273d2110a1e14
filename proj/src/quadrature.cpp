#include "stabcert/quadrature.hpp"
#include "stabcert/specineq.hpp"

#include <cmath>
#include <limits>

namespace stabcert {

Eigen::VectorXd simpson(const VectorIntegrand& f, double a, double b, int n) {
  require(n >= 2 && n % 2 == 0, "Simpson needs an even subinterval count");
  const double h = (b - a) / n;
  Eigen::VectorXd sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * (h / 3.0);
}

QuadratureResult integrate_graded(const VectorIntegrand& f, double a,
                                  double b, double stiffness,
                                  const SimpsonOptions& options) {
  require(b >= a, "integration bounds out of order");
  require(options.min_subintervals >= 2 && options.min_subintervals % 2 == 0,
          "min_subintervals must be even");
  QuadratureResult result;
  const double L = b - a;
  if (L == 0.0) {
    result.value = f(a) * 0.0;
    result.evaluations = 1;
    return result;
  }
  int levels = 0;
  const double stiff = std::abs(stiffness) * L;
  if (stiff > 1e-3)
    levels = std::min(60, static_cast<int>(std::ceil(std::log2(stiff / 1e-3))));

  struct Piece {
    double lo, hi;
    int n;
    Eigen::VectorXd value;
  };
  std::vector<Piece> pieces;
  for (int j = 0; j < levels; ++j)
    pieces.push_back({a + L * std::ldexp(1.0, -j - 1), a + L * std::ldexp(1.0, -j),
                      options.min_subintervals, {}});
  pieces.push_back({a, a + L * std::ldexp(1.0, -levels),
                    options.min_subintervals, {}});

  Eigen::VectorXd total;
  for (auto& p : pieces) {
    p.value = simpson(f, p.lo, p.hi, p.n);
    result.evaluations += p.n + 1;
    total = total.size() ? Eigen::VectorXd(total + p.value) : p.value;
  }
  // Each piece refines until its change is small against the whole integral.
  const double scale =
      std::max(total.lpNorm<1>(), std::numeric_limits<double>::min());
  for (auto& p : pieces) {
    double change = 0.0;
    while (true) {
      const int n2 = 2 * p.n;
      Eigen::VectorXd refined = simpson(f, p.lo, p.hi, n2);
      result.evaluations += n2 + 1;
      change = (refined - p.value).lpNorm<1>() / scale;
      p.value = std::move(refined);
      p.n = n2;
      if (change < options.rel_tol) break;
      if (n2 >= options.max_subintervals) {
        result.converged = false;
        break;
      }
    }
    result.rel_change = std::max(result.rel_change, change);
  }
  result.value = pieces.front().value;
  for (std::size_t i = 1; i < pieces.size(); ++i) result.value += pieces[i].value;
  return result;
}

ObservationGramian::ObservationGramian(const SpectralDecomposition& dec,
                                       const SetIndicator& e)
    : eigenvalues_(dec.eigenvalues()) {
  require(feasible(dec), "basis too large for the observation Gramian");
  gram_ = restricted_gram(dec, dec.size(), e);
}

Eigen::MatrixXd ObservationGramian::interval_matrix(double t0, double t1,
                                                    double shift) const {
  require(t1 >= t0, "interval bounds out of order");
  const auto n = static_cast<Eigen::Index>(eigenvalues_.size());
  Eigen::MatrixXd Q(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double mu = eigenvalues_[i] + eigenvalues_[j] + 2.0 * shift;
      const double w = exp_integral(mu, t0, t1);
      Q(i, j) = gram_(i, j) * w;
      Q(j, i) = Q(i, j);
    }
  }
  return Q;
}

double ObservationGramian::evaluate(const Eigen::VectorXd& c, double t0,
                                    double t1, double shift) const {
  return c.dot(interval_matrix(t0, t1, shift) * c);
}

namespace {

double stiffness_of(const SpectralDecomposition& dec, double shift) {
  const auto& ev = dec.eigenvalues();
  return 2.0 * std::max(std::abs(ev.front() + shift), std::abs(ev.back() + shift));
}

GridFunction evolve(const SpectralDecomposition& dec, const Eigen::VectorXd& c,
                    double t, double shift) {
  Eigen::VectorXd ct = c;
  const auto& ev = dec.eigenvalues();
  for (Eigen::Index j = 0; j < ct.size(); ++j)
    ct(j) *= std::exp(-t * (ev[j] + shift));
  return dec.synthesize(ct);
}

}  // namespace

QuadratureResult observation_simpson(const SpectralDecomposition& dec,
                                     const SetIndicator& e,
                                     const Eigen::VectorXd& c, double t0,
                                     double t1, double shift,
                                     const SimpsonOptions& options) {
  require_same_domain(dec.domain(), e.domain());
  const double h = dec.domain().cell_volume();
  auto integrand = [&](double t) {
    const GridFunction u = evolve(dec, c, t, shift);
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (e.contains(i)) sum += u[i] * u[i];
    Eigen::VectorXd v(1);
    v(0) = sum * h;
    return v;
  };
  return integrate_graded(integrand, t0, t1, stiffness_of(dec, shift),
                          options);
}

QuadratureResult observation_density(const SpectralDecomposition& dec,
                                     const Eigen::VectorXd& c, double t0,
                                     double t1, double shift,
                                     const SimpsonOptions& options) {
  auto integrand = [&](double t) {
    const GridFunction u = evolve(dec, c, t, shift);
    Eigen::VectorXd v(static_cast<Eigen::Index>(u.size()));
    for (std::size_t i = 0; i < u.size(); ++i) v(i) = u[i] * u[i];
    return v;
  };
  return integrate_graded(integrand, t0, t1, stiffness_of(dec, shift),
                          options);
}

ObservationIntegrator::ObservationIntegrator(const SpectralDecomposition& dec,
                                             const SetIndicator& e)
    : dec_(dec), e_(e) {
  require_same_domain(dec.domain(), e.domain());
  if (ObservationGramian::feasible(dec)) gramian_.emplace(dec, e);
}

void ObservationIntegrator::set_interval(double t0, double t1, double shift) {
  t0_ = t0;
  t1_ = t1;
  shift_ = shift;
  if (gramian_) interval_ = gramian_->interval_matrix(t0, t1, shift);
}

double ObservationIntegrator::value(const Eigen::VectorXd& c) const {
  if (gramian_) return c.dot(interval_ * c);
  return simpson(c);
}

double ObservationIntegrator::simpson(const Eigen::VectorXd& c) const {
  return observation_simpson(dec_, e_, c, t0_, t1_, shift_).value(0);
}

}  // namespace stabcert
