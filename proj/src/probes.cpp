#include "stabcert/probes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "fourier.hpp"
#include "stabcert/quadrature.hpp"

namespace stabcert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kResidue = 1e-12;
constexpr double kTailMass = 1e-3;
constexpr double kViolationTolerance = 1e-7;

double wrapped(double dx, const GridDomain& d) {
  if (!d.periodic()) return dx;
  const double L = 2.0 * d.half_width();
  dx = std::fmod(dx + d.half_width(), L);
  if (dx < 0.0) dx += L;
  return dx - d.half_width();
}

double distance(const std::array<double, 2>& x, const std::array<double, 2>& y,
                const GridDomain& d) {
  double s = 0.0;
  for (int a = 0; a < d.dim(); ++a) {
    const double v = wrapped(x[a] - y[a], d);
    s += v * v;
  }
  return std::sqrt(s);
}

double evolved_norm(const SpectralDecomposition& dec, const Eigen::VectorXd& c,
                    double t) {
  const auto& ev = dec.eigenvalues();
  double s = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double v = std::exp(-t * ev[j]) * c(j);
    s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace

GridFunction periodic_kernel(double s, double l,
                             const std::array<double, 2>& center,
                             const GridDomain& d) {
  require(d.periodic(), "the kernel needs a periodic grid");
  require(s > 0.0 && l > 0.0, "s and l must be positive");
  const int n = d.dim();
  const int m = d.points_per_axis();
  const double x0 = -d.half_width() + 0.5 * d.spacing();
  const double scale = std::pow(2.0 * d.half_width(), -n);

  // The Nyquist bins have no partner on the lattice; they are summed below as
  // real cosines so the transform of the rest is real up to roundoff.
  struct Term {
    std::array<double, 2> xi;
    double weight;
  };
  std::vector<Term> nyquist;
  std::vector<std::complex<double>> in(d.size()), out;
  for (std::size_t q = 0; q < d.size(); ++q) {
    std::array<int, 2> bins{static_cast<int>(q), 0};
    if (n == 2) bins = {static_cast<int>(q) / m, static_cast<int>(q) % m};
    std::array<double, 2> xi{0.0, 0.0};
    double xi2 = 0.0, phase = 0.0;
    bool unpaired = false;
    for (int a = 0; a < n; ++a) {
      xi[a] = d.frequency(bins[a]);
      xi2 += xi[a] * xi[a];
      phase += xi[a] * (x0 - center[a]);
      unpaired = unpaired || bins[a] == m / 2;
    }
    const double weight = scale * std::exp(-l * std::pow(xi2, s / 2.0));
    if (unpaired) {
      if (weight > 0.0) nyquist.push_back({xi, weight});
      continue;
    }
    in[q] = std::polar(weight, phase);
  }
  detail::complex_backward(d, in, out);

  GridFunction g(d);
  double peak = 0.0, residue = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double v = out[i].real();
    if (!nyquist.empty()) {
      const auto x = d.center(i);
      for (const auto& t : nyquist) {
        double ph = 0.0;
        for (int a = 0; a < n; ++a) ph += t.xi[a] * (x[a] - center[a]);
        v += t.weight * std::cos(ph);
      }
    }
    g[i] = v;
    peak = std::max(peak, std::abs(v));
    residue = std::max(residue, std::abs(out[i].imag()));
  }
  if (residue > kResidue * std::max(peak, 1.0))
    fail(ErrorCode::kNumerical,
         "kernel transform left an imaginary residue of " +
             std::to_string(residue));
  return g;
}

GridFunction build_kernel(double s, const GridDomain& domain) {
  return periodic_kernel(s, 1.0, {0.0, 0.0}, domain);
}

double kernel_value(double s, const GridDomain& d,
                    const std::array<double, 2>& x) {
  require(d.periodic(), "the kernel needs a periodic grid");
  const int n = d.dim();
  const int m = d.points_per_axis();
  double sum = 0.0;
  const int rows = n == 2 ? m : 1;
  for (int q0 = 0; q0 < rows; ++q0) {
    for (int q1 = 0; q1 < m; ++q1) {
      double xi2 = 0.0, phase = 0.0;
      if (n == 2) {
        const double a = d.frequency(q0), b = d.frequency(q1);
        xi2 = a * a + b * b;
        phase = a * x[0] + b * x[1];
      } else {
        const double a = d.frequency(q1);
        xi2 = a * a;
        phase = a * x[0];
      }
      sum += std::exp(-std::pow(xi2, s / 2.0)) * std::cos(phase);
    }
  }
  return sum * std::pow(2.0 * d.half_width(), -n);
}

double fit_kernel_decay_constant(const GridFunction& g, double s) {
  const GridDomain& d = g.domain;
  const int n = d.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = d.center(i);
    const double r2 = x[0] * x[0] + x[1] * x[1];
    best = std::max(best, std::abs(g[i]) * std::pow(1.0 + r2, (n + s) / 2.0));
  }
  return best;
}

KernelProbe make_kernel_probe(double s, double c, const GridDomain& domain,
                              const std::array<double, 2>& center, double l) {
  require(c >= 0.0, "c must be nonnegative");
  require(domain.periodic(), "the kernel needs a periodic grid");
  const int refine = domain.dim() == 1 ? 2 : 1;
  const GridDomain wide = GridDomain::make(
      domain.dim(), kWideFactor * domain.half_width(),
      kWideFactor * refine * domain.points_per_axis(), true);
  KernelProbe p{s, c, center, l, domain, build_kernel(s, wide), 0.0, 0.0};
  p.decay_constant = fit_kernel_decay_constant(build_kernel(s, domain), s);
  p.norm_constant = norm(periodic_kernel(s, l, center, domain)) *
                    std::pow(l, domain.dim() / (2.0 * s));
  return p;
}

GridFunction kernel_probe_solution(const KernelProbe& p, double t) {
  require(t >= 0.0, "t must be nonnegative");
  const GridDomain& d = p.domain;
  const GridDomain& w = p.kernel.domain;
  const int n = d.dim();
  const int m = w.points_per_axis();
  const double R = d.half_width();
  const double Rw = w.half_width();
  const double h = w.spacing();
  const double sigma = std::pow(t + p.l, 1.0 / p.s);
  if (sigma < 1.0)
    fail(ErrorCode::kResolution,
         "t + l < 1: the rescaled kernel is narrower than the cached one; "
         "evaluate through the semigroup instead");

  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < p.kernel.size(); ++i) {
    const auto y = w.center(i);
    const double v = p.kernel[i] * p.kernel[i];
    total += v;
    if (std::max(std::abs(y[0]), std::abs(y[1])) > Rw / sigma) outside += v;
  }
  if (outside > kTailMass * total)
    fail(ErrorCode::kResolution,
         "rescaled kernel support exceeds the cached box; use a larger domain");

  auto sample = [&](int i0, int i1) {
    i0 = std::clamp(i0, 0, m - 1);
    i1 = std::clamp(i1, 0, m - 1);
    return p.kernel[n == 2 ? static_cast<std::size_t>(i0) * m + i1
                           : static_cast<std::size_t>(i0)];
  };
  auto interpolate = [&](const std::array<double, 2>& y) {
    std::array<int, 2> lo{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
    for (int a = 0; a < n; ++a) {
      const double pos = (y[a] + Rw) / h - 0.5;
      lo[a] = static_cast<int>(std::floor(pos));
      frac[a] = pos - lo[a];
    }
    if (n == 1)
      return (1.0 - frac[0]) * sample(lo[0], 0) + frac[0] * sample(lo[0] + 1, 0);
    return (1.0 - frac[0]) * ((1.0 - frac[1]) * sample(lo[0], lo[1]) +
                              frac[1] * sample(lo[0], lo[1] + 1)) +
           frac[0] * ((1.0 - frac[1]) * sample(lo[0] + 1, lo[1]) +
                      frac[1] * sample(lo[0] + 1, lo[1] + 1));
  };

  // Images k with |x - x0 + 2Rk| / sigma inside the cached box.
  const int reach = static_cast<int>(std::ceil(Rw * sigma / (2.0 * R))) + 1;
  const double factor = std::exp(p.c * t) * std::pow(sigma, -n);
  GridFunction u(d);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto x = d.center(i);
    std::array<double, 2> base{0.0, 0.0};
    for (int a = 0; a < n; ++a) base[a] = wrapped(x[a] - p.center[a], d);
    double v = 0.0;
    for (int k0 = -reach; k0 <= reach; ++k0) {
      const double y0 = (base[0] + 2.0 * R * k0) / sigma;
      if (std::abs(y0) >= Rw) continue;
      if (n == 1) {
        v += interpolate({y0, 0.0});
        continue;
      }
      for (int k1 = -reach; k1 <= reach; ++k1) {
        const double y1 = (base[1] + 2.0 * R * k1) / sigma;
        if (std::abs(y1) >= Rw) continue;
        v += interpolate({y0, y1});
      }
    }
    u[i] = factor * v;
  }
  return u;
}

GridFunction kernel_probe_semigroup(const KernelProbe& p, double t) {
  require(t >= 0.0, "t must be nonnegative");
  GridFunction u = periodic_kernel(p.s, t + p.l, p.center, p.domain);
  return std::exp(p.c * t) * u;
}

double choose_l0(double T, double alpha, double s, int n) {
  require(T > 0.0, "T must be positive");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  require(s > 0.0 && n >= 1, "s and n must be positive");
  return T / std::expm1(2.0 * s / n * std::log(2.0 / (1.0 + alpha)));
}

double kernel_tail_integral(double r, double s, int n) {
  require(r >= 0.0 && s > 0.0, "r must be nonnegative and s positive");
  if (n == 2) return kPi * std::pow(1.0 + r * r, -1.0 - s) / (1.0 + s);
  require(n == 1, "dimension must be 1 or 2");
  // y = tan(theta): 2 int_{atan r}^{pi/2} cos^{2s} theta d theta.
  const double a = std::atan(r), b = kPi / 2.0;
  const int pieces = 4096;
  Eigen::VectorXd v = simpson(
      [&](double th) {
        Eigen::VectorXd out(1);
        out(0) = std::pow(std::max(0.0, std::cos(th)), 2.0 * s);
        return out;
      },
      a, b, pieces);
  return 2.0 * v(0);
}

FalsificationReport falsify_weak_observability(
    const SpectralDecomposition& dec, const SetIndicator& e,
    const ObservabilityClaim& claim,
    const std::vector<std::array<double, 2>>& centers) {
  require_same_domain(dec.domain(), e.domain());
  const auto* f = std::get_if<FractionalLaplacian>(&dec.spec());
  require(f != nullptr, "falsification needs the fractional kind");
  require(claim.C > 0.0 && claim.T > 0.0, "claim C and T must be positive");
  require(claim.alpha >= 0.0 && claim.alpha < 1.0,
          "claim alpha must lie in [0, 1)");
  require(!centers.empty(), "no centers given");

  const GridDomain& d = dec.domain();
  const int n = d.dim();
  FalsificationReport r;
  r.claim = claim;
  r.s = f->s;
  r.c = f->c;
  r.l0 = choose_l0(claim.T, claim.alpha, f->s, n);
  r.decay_constant = fit_kernel_decay_constant(build_kernel(f->s, d), f->s);

  ObservationIntegrator engine(dec, e);
  engine.set_interval(0.0, claim.T, 0.0);

  const double T = claim.T, C = claim.C, alpha = claim.alpha;
  const double l_pow = std::pow(r.l0, -n / (2.0 * f->s));
  for (const auto& x0 : centers) {
    CenterResult cr;
    cr.center = x0;
    cr.l0 = r.l0;
    const GridFunction phi = periodic_kernel(f->s, r.l0, x0, d);
    const Eigen::VectorXd coeff = dec.coefficients(phi);
    cr.initial_norm = coeff.norm();
    cr.lhs = evolved_norm(dec, coeff, T) - alpha * cr.initial_norm;
    cr.observation = engine.value(coeff);
    cr.rhs = C * std::sqrt(std::max(0.0, cr.observation));
    cr.violated = cr.lhs - cr.rhs > kViolationTolerance * std::max(1.0, cr.lhs);
    if (cr.violated) ++r.violations;

    const double c2 = cr.initial_norm / l_pow;
    r.norm_constant = c2;
    const double c3 = c2 * (1.0 - alpha) * l_pow / 2.0;
    const double outer = C * C * std::exp(2.0 * f->c * T) *
                         r.decay_constant * r.decay_constant * l_pow * l_pow *
                         l_pow * l_pow * T;
    const double target = c3 * c3 / (2.0 * outer);
    const double width = std::pow(T + r.l0, 1.0 / f->s);
    double radius = 0.0;
    if (kernel_tail_integral(0.0, f->s, n) > target) {
      double lo = 0.0, hi = 1.0;
      while (kernel_tail_integral(hi, f->s, n) > target && hi < 1e12) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kernel_tail_integral(mid, f->s, n) > target ? lo : hi) = mid;
      }
      radius = hi * width;
    }
    cr.radius = radius;
    cr.local_mass_bound = target;
    double mass = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (e.contains(i) && distance(d.center(i), x0, d) < radius)
        mass += d.cell_volume();
    cr.local_mass = mass;
    r.centers.push_back(cr);
  }
  return r;
}

std::vector<double> probe_tail_observation(const SpectralDecomposition& dec,
                                           const SetIndicator& e,
                                           const KernelProbe& probe, double T,
                                           const std::vector<double>& radii) {
  require_same_domain(dec.domain(), e.domain());
  require(T > 0.0, "T must be positive");
  const GridDomain& d = dec.domain();
  const GridFunction phi = periodic_kernel(probe.s, probe.l, probe.center, d);
  const QuadratureResult density =
      observation_density(dec, dec.coefficients(phi), 0.0, T, 0.0);
  std::vector<double> out;
  for (double L : radii) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (e.contains(i) && distance(d.center(i), probe.center, d) > L)
        sum += density.value(static_cast<Eigen::Index>(i));
    out.push_back(sum * d.cell_volume());
  }
  return out;
}

GroundStateProbeReport ground_state_probe(const SpectralDecomposition& dec,
                                          const SetIndicator& e,
                                          const ObservabilityClaim& claim) {
  require_same_domain(dec.domain(), e.domain());
  const auto* hm = std::get_if<ShiftedHermite>(&dec.spec());
  require(hm != nullptr, "the ground-state probe needs the Hermite kind");
  require(claim.C > 0.0 && claim.T > 0.0, "claim C and T must be positive");
  require(claim.alpha >= 0.0 && claim.alpha < 1.0,
          "claim alpha must lie in [0, 1)");
  const GridDomain& d = dec.domain();
  const int n = d.dim();

  GroundStateProbeReport r;
  r.claim = claim;
  r.c = hm->c;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!e.contains(i)) continue;
    const auto x = d.center(i);
    r.gaussian_mass += std::exp(-(x[0] * x[0] + x[1] * x[1]));
  }
  r.gaussian_mass *= d.cell_volume();

  const Eigen::VectorXd coeff = dec.coefficients(hermite_ground_state(d));
  r.lhs = evolved_norm(dec, coeff, claim.T) - claim.alpha * coeff.norm();
  ObservationIntegrator engine(dec, e);
  engine.set_interval(0.0, claim.T, 0.0);
  r.observation = engine.value(coeff);
  r.rhs = claim.C * std::sqrt(std::max(0.0, r.observation));
  r.violated = r.lhs - r.rhs > kViolationTolerance * std::max(1.0, r.lhs);

  r.closed_form_rhs = claim.C * std::pow(kPi, -n / 4.0) * std::sqrt(claim.T) *
                      std::exp((hm->c - n) * claim.T) *
                      std::sqrt(r.gaussian_mass);
  r.closed_form_violated = r.closed_form_rhs < 1.0 - claim.alpha;
  return r;
}

}  // namespace stabcert
