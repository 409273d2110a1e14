#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stabcert/domain.hpp"

namespace stabcert {

class SetIndicator;

// H = (-Laplacian)^{s/2} - c, diagonalized by the Fourier lattice.
struct FractionalLaplacian {
  double s = 1.0;
  double c = 0.0;
};

// H = -Laplacian + |x|^2 - c.
struct ShiftedHermite {
  double c = 0.0;
};

enum class PotentialCondition { kI, kII };

// H = -Laplacian + V with a tabulated potential.
struct Schrodinger {
  GridFunction potential;
  PotentialCondition condition = PotentialCondition::kII;
  // Form-bound of V_- under Condition I; ignored for Condition II.
  double delta = 0.5;
};

using OperatorSpec = std::variant<FractionalLaplacian, ShiftedHermite,
                                  Schrodinger>;

// Checks the per-kind invariants against the grid it will be discretized on.
void validate(const OperatorSpec& spec, const GridDomain& domain);
std::string kind_name(const OperatorSpec& spec);

enum class BasisKind { kFourier, kDense };

// Eigenvalues (ascending) and an orthonormal eigenbasis of a discretized H.
//
// Fourier kind: real tensor-product Fourier modes (cos/sin per axis) on the
// periodic lattice; transforms go through FFTW. Dense kind: the symmetric
// matrix -Laplacian + V with Dirichlet walls at +-R, where the Laplacian is
// the sine-spectral one, diagonalized with Eigen.
//
// Immutable; copies share storage.
class SpectralDecomposition {
 public:
  static SpectralDecomposition diagonalize(const OperatorSpec& spec,
                                           const GridDomain& domain);
  // Loads from / stores to the binary cache when STABCERT_CACHE_DIR is set.
  static SpectralDecomposition diagonalize_cached(const OperatorSpec& spec,
                                                  const GridDomain& domain);

  const OperatorSpec& spec() const;
  const GridDomain& domain() const;
  BasisKind kind() const;
  std::size_t size() const;
  const std::vector<double>& eigenvalues() const;

  // Number of eigenvalues <= k (the rank of the spectral projection).
  std::size_t count_at_most(double k) const;

  // Coordinates of f in the eigenbasis, ordered like eigenvalues().
  Eigen::VectorXd coefficients(const GridFunction& f) const;
  GridFunction synthesize(const Eigen::VectorXd& coefficients) const;
  GridFunction mode(std::size_t j) const;
  // First `count` eigenvectors as columns of a cells x count matrix.
  Eigen::MatrixXd modes(std::size_t count) const;

  // Matrix of H in the cell basis.
  Eigen::MatrixXd dense_operator() const;

  // Max residual ||H v - lambda v|| / max(1, |lambda|) over all pairs.
  double max_residual() const;

  // Binary round-trip for the decomposition cache.
  void save(const std::string& path) const;
  static SpectralDecomposition load(const std::string& path,
                                    const OperatorSpec& spec,
                                    const GridDomain& domain);

  struct Impl;

 private:
  explicit SpectralDecomposition(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// e^{-tH} f.
GridFunction semigroup_apply(const SpectralDecomposition& dec, double t,
                             const GridFunction& f);

// Spectral projection onto span{v_j : lambda_j <= k}; zero when no eigenvalue
// qualifies.
GridFunction project(const SpectralDecomposition& dec, double k,
                     const GridFunction& f);

struct DissipativeReport {
  double k = 0.0;
  std::vector<double> t_samples;
  int trials = 0;
  std::uint64_t seed = 0;
  // max over trials and t of ||(1 - pi_k) e^{-tH} f|| e^{tk} for unit f.
  double max_ratio = 0.0;
  double worst_t = 0.0;
};

DissipativeReport dissipative_margin(const SpectralDecomposition& dec,
                                     double k,
                                     const std::vector<double>& t_samples,
                                     int trials, std::uint64_t seed);

// Normalized Hermite functions phi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x)
// e^{-x^2/2}, evaluated with the stable three-term recurrence.
double hermite_function(int k, double x);
// Physicists' Hermite polynomial H_k(x).
double hermite_polynomial(int k, double x);

struct HermiteBasis {
  int dim = 1;
  int max_degree = 0;
  // Multi-indices alpha with |alpha| <= max_degree, graded by |alpha|.
  std::vector<std::array<int, 2>> indices;
  std::vector<GridFunction> functions;

  const GridFunction& at(const std::array<int, 2>& alpha) const;
};

HermiteBasis hermite_basis(int max_degree, const GridDomain& domain);

// Normalized ground state pi^{-n/4} e^{-|x|^2/2} sampled on the grid.
GridFunction hermite_ground_state(const GridDomain& domain);

}  // namespace stabcert
