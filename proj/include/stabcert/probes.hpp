#pragma once

#include <array>
#include <optional>
#include <vector>

#include "stabcert/certify.hpp"
#include "stabcert/domain.hpp"
#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"

namespace stabcert {

// Periodic lattice version of g_l(x - x0) with
//   g_l = F^{-1} e^{-l |xi|^s},
// i.e. (2R)^{-n} sum over the frequency lattice of
// e^{-l |xi|^s} e^{i xi (x - x0)}, sampled at cell centers. l = 1 gives the
// kernel g itself. Throws kNumerical if the imaginary residue exceeds 1e-12.
GridFunction periodic_kernel(double s, double l,
                             const std::array<double, 2>& center,
                             const GridDomain& domain);

// g centered at the origin.
GridFunction build_kernel(double s, const GridDomain& domain);

// Direct lattice sum of g at an arbitrary point.
double kernel_value(double s, const GridDomain& domain,
                    const std::array<double, 2>& x);

// max over cells of |g(x)| (1 + |x|^2)^{(n+s)/2}.
double fit_kernel_decay_constant(const GridFunction& g, double s);

// Translated heat kernel
//   u(t, x; l) = e^{ct} (t + l)^{-n/s} g((x - x0) / (t + l)^{1/s}).
struct KernelProbe {
  double s = 1.0;
  double c = 0.0;
  std::array<double, 2> center{0.0, 0.0};
  double l = 1.0;
  GridDomain domain;
  // g on a box kWideFactor times wider than the domain, so periodic images
  // of the domain can be summed explicitly.
  GridFunction kernel;
  // Pointwise decay constant of g.
  double decay_constant = 0.0;
  // ||u(0, .; l)|| l^{n/(2s)}, measured on the grid.
  double norm_constant = 0.0;
};

KernelProbe make_kernel_probe(double s, double c, const GridDomain& domain,
                              const std::array<double, 2>& center, double l);

inline constexpr int kWideFactor = 4;

// u(t, .; l) by linear interpolation of the cached kernel, summed over the
// periodic images of the domain. Throws kResolution when the scale
// (t + l)^{1/s} < 1, or when more than 1e-3 of the cached kernel's L2 mass
// lies beyond |y| > R_wide / (t + l)^{1/s}.
GridFunction kernel_probe_solution(const KernelProbe& probe, double t);

// u(t, .; l) through the semigroup: e^{ct} g_{t+l}(. - x0) on the lattice.
GridFunction kernel_probe_semigroup(const KernelProbe& probe, double t);

// l0 = T / ((2 / (1 + alpha))^{2s/n} - 1).
double choose_l0(double T, double alpha, double s, int n);

// Normalized tail int_{|y| > r} (1 + |y|^2)^{-n-s} dy.
double kernel_tail_integral(double r, double s, int n);

struct CenterResult {
  std::array<double, 2> center{0.0, 0.0};
  double l0 = 0.0;
  // ||e^{-TH} phi|| - alpha ||phi||.
  double lhs = 0.0;
  double initial_norm = 0.0;
  // int_0^T ||e^{-tH} phi||^2_{L2(E)} dt.
  double observation = 0.0;
  // C sqrt(observation).
  double rhs = 0.0;
  bool violated = false;
  // Radius L0 at which the tail estimate caps the observation outside
  // B(x0, L0) at half the squared gap, and the implied lower bound on
  // |E cap B(x0, L0)|, next to the measured value.
  double radius = 0.0;
  double local_mass_bound = 0.0;
  double local_mass = 0.0;
};

struct FalsificationReport {
  ObservabilityClaim claim;
  double s = 1.0;
  double c = 0.0;
  double l0 = 0.0;
  double decay_constant = 0.0;
  double norm_constant = 0.0;
  std::vector<CenterResult> centers;
  int violations = 0;
};

// Probes a claimed (C, T, alpha) at each center with the translated kernel
// at l = l0. Fractional kind only.
FalsificationReport falsify_weak_observability(
    const SpectralDecomposition& dec, const SetIndicator& e,
    const ObservabilityClaim& claim,
    const std::vector<std::array<double, 2>>& centers);

// Observation mass of a probe outside B(x0, L), for each L:
// int_0^T int_{E \ B(x0, L)} |e^{-tH} phi|^2 dx dt.
std::vector<double> probe_tail_observation(const SpectralDecomposition& dec,
                                           const SetIndicator& e,
                                           const KernelProbe& probe, double T,
                                           const std::vector<double>& radii);

struct GroundStateProbeReport {
  ObservabilityClaim claim;
  double c = 0.0;
  // int_E e^{-|x|^2} dx on the grid.
  double gaussian_mass = 0.0;
  // Discrete evaluation with the sampled ground state.
  double lhs = 0.0;
  double observation = 0.0;
  double rhs = 0.0;
  bool violated = false;
  // Closed form: C pi^{-n/4} sqrt(T) e^{(c-n)T} (int_E e^{-|x|^2})^{1/2}
  // against 1 - alpha.
  double closed_form_rhs = 0.0;
  bool closed_form_violated = false;
};

// Hermite kind: the normalized ground state pi^{-n/4} e^{-|x|^2/2}.
GroundStateProbeReport ground_state_probe(const SpectralDecomposition& dec,
                                          const SetIndicator& e,
                                          const ObservabilityClaim& claim);

}  // namespace stabcert
