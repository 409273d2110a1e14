#include "stabcert/feedback.hpp"

#include <cmath>
#include <sstream>

#include "stabcert/specineq.hpp"

namespace stabcert {

double damping_omega(double delta, double c1, int n) {
  return std::min((1.0 - delta) * n * n - 2.0, 0.5 * std::exp(-2.0 * c1 * n));
}

DampingBound damping_decay_bound(double delta, double c1, int n_min,
                                 int n_max) {
  require(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
  require(std::isfinite(c1) && c1 >= 0.0, "c1 must be nonnegative");
  require(n_min >= 1 && n_max >= n_min, "empty N range");
  DampingBound out;
  out.c1 = c1;
  out.omega = -INFINITY;
  for (int n = n_min; n <= n_max; ++n) {
    const double w = damping_omega(delta, c1, n);
    out.tested_n.push_back(n);
    out.omegas.push_back(w);
    if (w > out.omega) {
      out.omega = w;
      out.chosen_n = n;
    }
  }
  if (!(out.omega > 0.0))
    fail(ErrorCode::kUnverifiable,
         "no N in the range gives a positive damping rate");
  return out;
}

DampingBound damping_decay_bound(const SpectralDecomposition& half_laplacian,
                                 const SetIndicator& e, double delta,
                                 int n_min, int n_max) {
  const auto* f = std::get_if<FractionalLaplacian>(&half_laplacian.spec());
  require(f && f->s == 1.0 && f->c == 0.0,
          "the damping bound needs the (-Laplacian)^{1/2} decomposition");
  require(n_max <= max_resolvable_k(half_laplacian),
          "N range exceeds the grid's resolvable thresholds");
  double c1 = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double c = best_constant(half_laplacian, n, e).constant;
    if (!std::isfinite(c))
      fail(ErrorCode::kUnverifiable,
           "spectral constant infinite at N = " + std::to_string(n));
    c1 = std::max(c1, std::log(c) / n);
  }
  return damping_decay_bound(delta, c1, n_min, n_max);
}

namespace {

Eigen::MatrixXd damped_operator(const SpectralDecomposition& dec,
                                const SetIndicator& e) {
  require_same_domain(dec.domain(), e.domain());
  Eigen::MatrixXd H = dec.dense_operator();
  for (std::size_t i = 0; i < dec.size(); ++i)
    if (e.contains(i)) H(i, i) += 1.0;
  return H;
}

}  // namespace

double damped_min_eigenvalue(const SpectralDecomposition& dec,
                             const SetIndicator& e) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      damped_operator(dec, e), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::kNumerical, "eigen-decomposition of H + chi_E failed");
  return solver.eigenvalues()(0);
}

GridFunction FiniteRankFeedback::apply(const GridFunction& psi) const {
  require_same_domain(psi.domain, e.domain());
  Eigen::Map<const Eigen::VectorXd> v(psi.values.data(),
                                      static_cast<Eigen::Index>(psi.size()));
  const Eigen::VectorXd c =
      eigenfunctions.transpose() * v * psi.domain.cell_volume();
  GridFunction out(psi.domain);
  Eigen::Map<Eigen::VectorXd>(out.values.data(),
                              static_cast<Eigen::Index>(out.size())) =
      rho * (eigenfunctions * (gram_inverse * c));
  return out;
}

double FiniteRankFeedback::norm_bound() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(gram_inverse,
                                                   Eigen::EigenvaluesOnly);
  return std::abs(rho) * s.eigenvalues().cwiseAbs().maxCoeff();
}

FiniteRankFeedback build_finite_rank_feedback(const SpectralDecomposition& dec,
                                              const SetIndicator& e) {
  require_same_domain(dec.domain(), e.domain());
  require(!e.is_empty(), "the control set has zero measure");
  const std::size_t n = dec.count_at_most(0.0);
  if (n == 0)
    fail(ErrorCode::kAlreadyStable,
         "already stable: no eigenvalue <= 0, feedback is unnecessary");

  FiniteRankFeedback fb{e, 0.0, 0, {}, {}, {}, {}, 1.0};
  fb.unstable_count = n;
  fb.eigenvalues.assign(dec.eigenvalues().begin(),
                        dec.eigenvalues().begin() + static_cast<long>(n));
  fb.rho = fb.eigenvalues.front() - 1.0;
  fb.eigenfunctions = dec.modes(n);
  fb.gram = restricted_gram(dec, n, e);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(fb.gram);
  const Eigen::VectorXd mu = solver.eigenvalues();
  const double lo = mu(0), hi = mu(mu.size() - 1);
  fb.condition_number = lo > 0.0 ? hi / lo : INFINITY;
  if (!(fb.condition_number <= 1e12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Gram matrix of the unstable eigenfunctions is numerically "
           "singular (condition number "
        << fb.condition_number << "); offending coefficient vector:";
    for (Eigen::Index i = 0; i < solver.eigenvectors().rows(); ++i)
      msg << ' ' << solver.eigenvectors()(i, 0);
    fail(ErrorCode::kSingularGram, msg.str());
  }
  const Eigen::MatrixXd& U = solver.eigenvectors();
  fb.gram_inverse = U * mu.cwiseInverse().asDiagonal() * U.transpose();
  return fb;
}

ClosedLoop::ClosedLoop(const SpectralDecomposition& dec,
                       const FeedbackOperator& fb)
    : dec_(dec) {
  if (const auto* d = std::get_if<DampingFeedback>(&fb)) {
    damping_ = true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        damped_operator(dec, d->e));
    if (solver.info() != Eigen::Success)
      fail(ErrorCode::kNumerical, "eigen-decomposition of H + chi_E failed");
    damped_values_ = solver.eigenvalues();
    damped_vectors_ = solver.eigenvectors();
    return;
  }
  const auto& f = std::get<FiniteRankFeedback>(fb);
  require_same_domain(dec.domain(), f.e.domain());
  require(f.unstable_count <= dec.size() &&
              static_cast<std::size_t>(f.eigenfunctions.cols()) ==
                  f.unstable_count,
          "feedback does not match the decomposition");
  for (std::size_t i = 0; i < f.unstable_count; ++i)
    require(f.eigenvalues[i] == dec.eigenvalues()[i],
            "feedback eigenvalues do not match the decomposition");
  unstable_count_ = f.unstable_count;

  // Column i: coefficients of chi_E phi_i.
  const auto n = static_cast<Eigen::Index>(unstable_count_);
  Eigen::MatrixXd chi(static_cast<Eigen::Index>(dec.size()), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    GridFunction g(dec.domain());
    for (std::size_t c = 0; c < dec.size(); ++c)
      g[c] = f.e.contains(c) ? f.eigenfunctions(static_cast<Eigen::Index>(c), i)
                             : 0.0;
    chi.col(i) = dec.coefficients(g);
  }
  forcing_matrix_ = f.rho * chi * f.gram_inverse;
  const double bound = f.norm_bound();
  substep_ = bound > 0.0 ? 0.1 / bound : INFINITY;
}

Eigen::VectorXd ClosedLoop::forcing(const Eigen::VectorXd& c) const {
  return forcing_matrix_ *
         c.head(static_cast<Eigen::Index>(unstable_count_));
}

Eigen::VectorXd ClosedLoop::etd2rk(const Eigen::VectorXd& c, double h) const {
  const auto& ev = dec_.eigenvalues();
  const Eigen::Index n = c.size();
  Eigen::VectorXd decay(n), phi1(n), phi2(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double z = -ev[j] * h;
    decay(j) = std::exp(z);
    if (std::abs(z) < 1e-4) {
      phi1(j) = h * (1.0 + z / 2.0 + z * z / 6.0);
      phi2(j) = h * (0.5 + z / 6.0 + z * z / 24.0);
    } else {
      const double em1 = std::expm1(z);
      phi1(j) = h * em1 / z;
      phi2(j) = h * (em1 - z) / (z * z);
    }
  }
  const Eigen::VectorXd fc = forcing(c);
  Eigen::VectorXd a = decay.cwiseProduct(c) + phi1.cwiseProduct(fc);
  const Eigen::VectorXd fa = forcing(a);
  a += phi2.cwiseProduct(fa - fc);
  return a;
}

Eigen::VectorXd ClosedLoop::step_coefficients(const Eigen::VectorXd& c,
                                              double dt) const {
  require(dt > 0.0, "dt must be positive");
  if (damping_) return dec_.coefficients(step(dec_.synthesize(c), dt));
  const int sub = std::max(1, static_cast<int>(std::ceil(dt / substep_)));
  const double h = dt / sub;
  Eigen::VectorXd out = c;
  for (int i = 0; i < sub; ++i) out = etd2rk(out, h);
  return out;
}

GridFunction ClosedLoop::step(const GridFunction& y, double dt) const {
  require(dt > 0.0, "dt must be positive");
  require_same_domain(y.domain, dec_.domain());
  if (!damping_) return dec_.synthesize(step_coefficients(dec_.coefficients(y), dt));
  Eigen::Map<const Eigen::VectorXd> v(y.values.data(),
                                      static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd w = damped_vectors_.transpose() * v;
  GridFunction out(y.domain);
  Eigen::Map<Eigen::VectorXd>(out.values.data(),
                              static_cast<Eigen::Index>(out.size())) =
      damped_vectors_ *
      (w.array() * (-dt * damped_values_.array()).exp()).matrix();
  return out;
}

GridFunction closed_loop_step(const SpectralDecomposition& dec,
                              const FeedbackOperator& fb,
                              const GridFunction& y, double dt) {
  return ClosedLoop(dec, fb).step(y, dt);
}

DecayReport simulate_decay(const ClosedLoop& loop, const GridFunction& y0,
                           double t_end, double dt) {
  require(t_end > 0.0 && dt > 0.0, "t_end and dt must be positive");
  require(dt <= t_end / 100.0 * (1.0 + 1e-12), "dt must be at most t_end/100");
  const auto& dec = loop.decomposition();
  require_same_domain(y0.domain, dec.domain());

  DecayReport r;
  r.t_end = t_end;
  r.dt = dt;
  const long steps = std::lround(t_end / dt);
  r.steps_per_sample =
      std::max(1, static_cast<int>(std::floor(t_end / (100.0 * dt))));

  const double h = dec.domain().cell_volume();
  Eigen::VectorXd c;
  GridFunction y = y0;
  if (!loop.is_damping()) c = dec.coefficients(y0);
  auto current_norm = [&] {
    if (!loop.is_damping()) return c.norm();
    double s = 0.0;
    for (double v : y.values) s += v * v;
    return std::sqrt(s * h);
  };

  const double n0 = current_norm();
  require(n0 > 0.0, "initial state is zero");
  r.times.push_back(0.0);
  r.norms.push_back(n0);
  for (long s = 1; s <= steps; ++s) {
    if (loop.is_damping())
      y = loop.step(y, dt);
    else
      c = loop.step_coefficients(c, dt);
    if (s % r.steps_per_sample != 0 && s != steps) continue;
    const double nrm = current_norm();
    const double t = s * dt;
    if (!(nrm <= 10.0 * n0)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "instability detected: ||y(" << t << ")|| = " << nrm
          << " exceeds 10 ||y(0)|| = " << 10.0 * n0;
      fail(ErrorCode::kInstability, msg.str());
    }
    r.times.push_back(t);
    r.norms.push_back(nrm);
  }

  const std::size_t from = r.times.size() / 2;
  const std::size_t count = r.times.size() - from;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = from; i < r.times.size(); ++i) {
    const double t = r.times[i];
    const double ly = std::log(r.norms[i]);
    st += t;
    sy += ly;
    stt += t * t;
    sty += t * ly;
  }
  const double slope = (count * sty - st * sy) / (count * stt - st * st);
  const double intercept = (sy - slope * st) / count;
  r.fitted_omega = -slope;
  r.fitted_prefactor = std::exp(intercept);
  double res = 0.0;
  r.monotone_tail = true;
  for (std::size_t i = from; i < r.times.size(); ++i) {
    const double e = std::log(r.norms[i]) - (intercept + slope * r.times[i]);
    res += e * e;
    if (i > from && r.norms[i] > r.norms[i - 1]) r.monotone_tail = false;
  }
  r.fit_residual = std::sqrt(res / count);
  return r;
}

DecayReport simulate_decay(const SpectralDecomposition& dec,
                           const FeedbackOperator& fb, const GridFunction& y0,
                           double t_end, double dt) {
  return simulate_decay(ClosedLoop(dec, fb), y0, t_end, dt);
}

}  // namespace stabcert
