#include "stabcert/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fourier.hpp"
#include "stabcert/io.hpp"

namespace stabcert {

struct SpectralDecomposition::Impl {
  OperatorSpec spec;
  GridDomain domain;
  BasisKind kind = BasisKind::kFourier;
  std::vector<double> eigenvalues;
  // Fourier: sorted position -> native index, and its inverse.
  std::vector<std::size_t> order;
  std::vector<std::size_t> position;
  std::vector<double> axis_table;
  // Dense: discrete-orthonormal eigenvectors as columns, and H itself.
  Eigen::MatrixXd basis;
  Eigen::MatrixXd op;
  double residual = 0.0;

  Impl(const OperatorSpec& s, const GridDomain& d) : spec(s), domain(d) {}
};

void validate(const OperatorSpec& spec, const GridDomain& domain) {
  struct V {
    const GridDomain& d;
    void operator()(const FractionalLaplacian& f) const {
      require(std::isfinite(f.s) && f.s > 0.0, "s must be positive");
      require(std::isfinite(f.c), "c must be finite");
      require(d.periodic(), "the fractional Laplacian needs a periodic grid");
    }
    void operator()(const ShiftedHermite& h) const {
      require(std::isfinite(h.c), "c must be finite");
      require(!d.periodic(), "the Hermite operator needs a non-periodic grid");
    }
    void operator()(const Schrodinger& s) const {
      require(!d.periodic(),
              "the Schrodinger operator needs a non-periodic grid");
      require_same_domain(s.potential.domain, d);
      for (double v : s.potential.values)
        require(std::isfinite(v), "potential values must be finite");
      if (s.condition == PotentialCondition::kI) {
        require(s.delta > 0.0 && s.delta < 1.0,
                "Condition I needs delta in (0, 1)");
        return;
      }
      const double shell = 0.9 * d.half_width();
      double shell_min = INFINITY, interior_min = INFINITY;
      for (std::size_t c = 0; c < d.size(); ++c) {
        const auto x = d.center(c);
        const bool in_shell =
            std::max(std::abs(x[0]), std::abs(x[1])) >= shell;
        auto& target = in_shell ? shell_min : interior_min;
        target = std::min(target, s.potential[c]);
      }
      require(shell_min > interior_min,
              "Condition II: the potential must grow toward the boundary "
              "(boundary-shell minimum must exceed the interior minimum)");
    }
  };
  std::visit(V{domain}, spec);
}

std::string kind_name(const OperatorSpec& spec) {
  struct V {
    std::string operator()(const FractionalLaplacian&) const { return "frac"; }
    std::string operator()(const ShiftedHermite&) const { return "hermite"; }
    std::string operator()(const Schrodinger&) const { return "schrodinger"; }
  };
  return std::visit(V{}, spec);
}

namespace {

// 1D Dirichlet Laplacian, spectral in the sine basis vanishing at +-R.
Eigen::MatrixXd sine_laplacian(const GridDomain& d) {
  const int m = d.points_per_axis();
  const double R = d.half_width();
  Eigen::MatrixXd S(m, m);
  Eigen::VectorXd k2(m);
  for (int q = 1; q <= m; ++q) {
    const double kappa = q * std::numbers::pi / (2.0 * R);
    k2(q - 1) = kappa * kappa;
    const double norm = q < m ? std::sqrt(2.0 / m) : std::sqrt(1.0 / m);
    for (int j = 0; j < m; ++j)
      S(j, q - 1) = norm * std::sin(q * std::numbers::pi * (j + 0.5) / m);
  }
  return S * k2.asDiagonal() * S.transpose();
}

Eigen::VectorXd potential_values(const OperatorSpec& spec,
                                 const GridDomain& d) {
  Eigen::VectorXd v(d.size());
  if (auto* h = std::get_if<ShiftedHermite>(&spec)) {
    for (std::size_t c = 0; c < d.size(); ++c) {
      const auto x = d.center(c);
      v(c) = x[0] * x[0] + x[1] * x[1] - h->c;
    }
  } else {
    const auto& s = std::get<Schrodinger>(spec);
    for (std::size_t c = 0; c < d.size(); ++c) v(c) = s.potential[c];
  }
  return v;
}

void fix_signs(Eigen::MatrixXd& U) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const double peak = U.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      if (std::abs(U(i, j)) > 1e-3 * peak) {
        if (U(i, j) < 0) U.col(j) *= -1.0;
        break;
      }
    }
  }
}

void fill_fourier(SpectralDecomposition::Impl& impl) {
  const auto& f = std::get<FractionalLaplacian>(impl.spec);
  const GridDomain& d = impl.domain;
  const std::size_t n = d.size();
  std::vector<double> native(n);
  for (std::size_t k = 0; k < n; ++k)
    native[k] = std::pow(detail::native_frequency(d, k), f.s) - f.c;
  impl.order.resize(n);
  std::iota(impl.order.begin(), impl.order.end(), 0);
  std::stable_sort(impl.order.begin(), impl.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return native[a] < native[b];
                   });
  impl.position.resize(n);
  impl.eigenvalues.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    impl.position[impl.order[j]] = j;
    impl.eigenvalues[j] = native[impl.order[j]];
  }
  impl.axis_table = detail::axis_basis_table(d);
  impl.kind = BasisKind::kFourier;
}

void fill_dense(SpectralDecomposition::Impl& impl) {
  const GridDomain& d = impl.domain;
  const Eigen::Index m = d.points_per_axis();
  const Eigen::MatrixXd L1 = sine_laplacian(d);
  Eigen::MatrixXd H;
  if (d.dim() == 1) {
    H = L1;
  } else {
    const Eigen::Index n = m * m;
    H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i0 = 0; i0 < m; ++i0)
      for (Eigen::Index k0 = 0; k0 < m; ++k0) {
        const double a = L1(i0, k0);
        for (Eigen::Index i1 = 0; i1 < m; ++i1) H(i0 * m + i1, k0 * m + i1) += a;
      }
    for (Eigen::Index i0 = 0; i0 < m; ++i0)
      H.block(i0 * m, i0 * m, m, m) += L1;
  }
  H.diagonal() += potential_values(impl.spec, d);
  H = 0.5 * (H + H.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::kNumerical, "dense eigen-decomposition failed");
  Eigen::MatrixXd U = solver.eigenvectors();
  const Eigen::VectorXd lambda = solver.eigenvalues();
  fix_signs(U);

  const Eigen::MatrixXd R = H * U - U * lambda.asDiagonal();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < U.cols(); ++j)
    worst = std::max(worst,
                     R.col(j).norm() / std::max(1.0, std::abs(lambda(j))));
  if (worst > 1e-8)
    fail(ErrorCode::kNumerical,
         "eigenpair residual " + std::to_string(worst) + " exceeds 1e-8");

  impl.eigenvalues.assign(lambda.data(), lambda.data() + lambda.size());
  impl.basis = U / std::sqrt(d.cell_volume());
  impl.op = std::move(H);
  impl.residual = worst;
  impl.kind = BasisKind::kDense;
}

std::string cache_path(const OperatorSpec& spec, const GridDomain& domain) {
  const char* dir = std::getenv("STABCERT_CACHE_DIR");
  if (!dir || !*dir) return {};
  return (std::filesystem::path(dir) / (content_hash(spec, domain) + ".bin"))
      .string();
}

template <class T>
void put(std::ostream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& i) {
  T v{};
  i.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!i) fail(ErrorCode::kIo, "truncated decomposition file");
  return v;
}

constexpr std::uint32_t kCacheMagic = 0x43445453;  // "STDC"
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

SpectralDecomposition SpectralDecomposition::diagonalize(
    const OperatorSpec& spec, const GridDomain& domain) {
  validate(spec, domain);
  auto impl = std::make_shared<Impl>(spec, domain);
  if (std::holds_alternative<FractionalLaplacian>(spec))
    fill_fourier(*impl);
  else
    fill_dense(*impl);
  return SpectralDecomposition(std::move(impl));
}

SpectralDecomposition SpectralDecomposition::diagonalize_cached(
    const OperatorSpec& spec, const GridDomain& domain) {
  const std::string path = cache_path(spec, domain);
  if (path.empty() || std::holds_alternative<FractionalLaplacian>(spec))
    return diagonalize(spec, domain);
  if (std::filesystem::exists(path)) {
    try {
      return load(path, spec, domain);
    } catch (const Error&) {
      // Stale or damaged entry: recompute and overwrite.
    }
  }
  auto dec = diagonalize(spec, domain);
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  dec.save(path);
  return dec;
}

const OperatorSpec& SpectralDecomposition::spec() const { return impl_->spec; }
const GridDomain& SpectralDecomposition::domain() const {
  return impl_->domain;
}
BasisKind SpectralDecomposition::kind() const { return impl_->kind; }
std::size_t SpectralDecomposition::size() const {
  return impl_->eigenvalues.size();
}
const std::vector<double>& SpectralDecomposition::eigenvalues() const {
  return impl_->eigenvalues;
}

std::size_t SpectralDecomposition::count_at_most(double k) const {
  const auto& ev = impl_->eigenvalues;
  return static_cast<std::size_t>(
      std::upper_bound(ev.begin(), ev.end(), k) - ev.begin());
}

Eigen::VectorXd SpectralDecomposition::coefficients(
    const GridFunction& f) const {
  require_same_domain(f.domain, impl_->domain);
  const std::size_t n = size();
  Eigen::VectorXd c(n);
  if (impl_->kind == BasisKind::kFourier) {
    std::vector<double> native;
    detail::real_forward(impl_->domain, f.values, native);
    for (std::size_t j = 0; j < n; ++j) c(j) = native[impl_->order[j]];
    return c;
  }
  Eigen::Map<const Eigen::VectorXd> v(f.values.data(), n);
  c.noalias() = impl_->basis.transpose() * v;
  c *= impl_->domain.cell_volume();
  return c;
}

GridFunction SpectralDecomposition::synthesize(
    const Eigen::VectorXd& coefficients) const {
  const std::size_t n = size();
  require(static_cast<std::size_t>(coefficients.size()) == n,
          "coefficient vector has the wrong length");
  GridFunction f(impl_->domain);
  if (impl_->kind == BasisKind::kFourier) {
    std::vector<double> native(n);
    for (std::size_t j = 0; j < n; ++j)
      native[impl_->order[j]] = coefficients(j);
    detail::real_inverse(impl_->domain, native, f.values);
    return f;
  }
  Eigen::Map<Eigen::VectorXd> out(f.values.data(), n);
  out.noalias() = impl_->basis * coefficients;
  return f;
}

GridFunction SpectralDecomposition::mode(std::size_t j) const {
  require(j < size(), "mode index out of range");
  GridFunction f(impl_->domain);
  Eigen::Map<Eigen::VectorXd>(f.values.data(), size()) = modes(j + 1).col(j);
  return f;
}

Eigen::MatrixXd SpectralDecomposition::modes(std::size_t count) const {
  require(count <= size(), "more modes requested than exist");
  const GridDomain& d = impl_->domain;
  const std::size_t n = size();
  if (impl_->kind == BasisKind::kDense)
    return impl_->basis.leftCols(static_cast<Eigen::Index>(count));
  Eigen::MatrixXd out(n, count);
  const auto& table = impl_->axis_table;
  const std::size_t m = d.points_per_axis();
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t native = impl_->order[j];
    if (d.dim() == 1) {
      for (std::size_t c = 0; c < n; ++c) out(c, j) = table[c * m + native];
    } else {
      const std::size_t k0 = native / m, k1 = native % m;
      for (std::size_t i0 = 0; i0 < m; ++i0) {
        const double a = table[i0 * m + k0];
        for (std::size_t i1 = 0; i1 < m; ++i1)
          out(i0 * m + i1, j) = a * table[i1 * m + k1];
      }
    }
  }
  return out;
}

Eigen::MatrixXd SpectralDecomposition::dense_operator() const {
  if (impl_->kind == BasisKind::kDense) return impl_->op;
  const Eigen::MatrixXd V = modes(size());
  Eigen::Map<const Eigen::VectorXd> lambda(impl_->eigenvalues.data(), size());
  Eigen::MatrixXd H = V * lambda.asDiagonal() * V.transpose();
  H *= impl_->domain.cell_volume();
  return 0.5 * (H + H.transpose());
}

double SpectralDecomposition::max_residual() const { return impl_->residual; }

void SpectralDecomposition::save(const std::string& path) const {
  std::ostringstream o(std::ios::binary);
  put(o, kCacheMagic);
  put(o, kCacheVersion);
  const std::string key = content_hash(impl_->spec, impl_->domain);
  o.write(key.data(), static_cast<std::streamsize>(key.size()));
  put(o, static_cast<std::uint32_t>(impl_->kind));
  put(o, static_cast<std::uint64_t>(size()));
  put(o, impl_->residual);
  o.write(reinterpret_cast<const char*>(impl_->eigenvalues.data()),
          static_cast<std::streamsize>(size() * sizeof(double)));
  if (impl_->kind == BasisKind::kDense) {
    const auto bytes =
        static_cast<std::streamsize>(size() * size() * sizeof(double));
    o.write(reinterpret_cast<const char*>(impl_->basis.data()), bytes);
    o.write(reinterpret_cast<const char*>(impl_->op.data()), bytes);
  }
  write_file_atomic(path, o.str());
}

SpectralDecomposition SpectralDecomposition::load(const std::string& path,
                                                  const OperatorSpec& spec,
                                                  const GridDomain& domain) {
  validate(spec, domain);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  if (get<std::uint32_t>(in) != kCacheMagic ||
      get<std::uint32_t>(in) != kCacheVersion)
    fail(ErrorCode::kIo, "not a decomposition file: " + path);
  std::string key(64, '\0');
  in.read(key.data(), 64);
  if (!in || key != content_hash(spec, domain))
    fail(ErrorCode::kIo, "decomposition file belongs to another operator: " + path);
  const auto kind = static_cast<BasisKind>(get<std::uint32_t>(in));
  const auto n = get<std::uint64_t>(in);
  if (n != domain.size()) fail(ErrorCode::kIo, "cached size mismatch");

  auto impl = std::make_shared<Impl>(spec, domain);
  impl->residual = get<double>(in);
  impl->eigenvalues.resize(n);
  in.read(reinterpret_cast<char*>(impl->eigenvalues.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (kind == BasisKind::kFourier) {
    fill_fourier(*impl);
  } else {
    impl->kind = BasisKind::kDense;
    impl->basis.resize(n, n);
    impl->op.resize(n, n);
    const auto bytes = static_cast<std::streamsize>(n * n * sizeof(double));
    in.read(reinterpret_cast<char*>(impl->basis.data()), bytes);
    in.read(reinterpret_cast<char*>(impl->op.data()), bytes);
  }
  if (!in) fail(ErrorCode::kIo, "truncated decomposition file: " + path);
  return SpectralDecomposition(std::move(impl));
}

GridFunction semigroup_apply(const SpectralDecomposition& dec, double t,
                             const GridFunction& f) {
  require(t >= 0.0, "semigroup time must be nonnegative");
  Eigen::VectorXd c = dec.coefficients(f);
  const auto& ev = dec.eigenvalues();
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= std::exp(-t * ev[j]);
  return dec.synthesize(c);
}

GridFunction project(const SpectralDecomposition& dec, double k,
                     const GridFunction& f) {
  Eigen::VectorXd c = dec.coefficients(f);
  const auto keep = static_cast<Eigen::Index>(dec.count_at_most(k));
  c.tail(c.size() - keep).setZero();
  return dec.synthesize(c);
}

DissipativeReport dissipative_margin(const SpectralDecomposition& dec,
                                     double k,
                                     const std::vector<double>& t_samples,
                                     int trials, std::uint64_t seed) {
  require(trials >= 1, "trials must be positive");
  for (double t : t_samples) require(t >= 0.0, "t samples must be >= 0");
  DissipativeReport r;
  r.k = k;
  r.t_samples = t_samples;
  r.trials = trials;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  const auto& ev = dec.eigenvalues();
  const std::size_t first = dec.count_at_most(k);
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::VectorXd c = dec.coefficients(random_unit(dec.domain(), rng));
    for (double t : t_samples) {
      // e^{-2t(lambda_j - k)} <= 1 on the high part.
      double sum = 0.0;
      for (std::size_t j = first; j < ev.size(); ++j)
        sum += std::exp(-2.0 * t * (ev[j] - k)) * c(j) * c(j);
      const double ratio = std::sqrt(sum);
      if (ratio > r.max_ratio) {
        r.max_ratio = ratio;
        r.worst_t = t;
      }
    }
  }
  return r;
}

}  // namespace stabcert
