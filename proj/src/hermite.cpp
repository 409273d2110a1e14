#include <cmath>
#include <numbers>

#include "stabcert/operators.hpp"

namespace stabcert {

namespace {
constexpr int kMaxDegree = 200;
}

double hermite_function(int k, double x) {
  require(k >= 0 && k <= kMaxDegree, "Hermite degree out of range");
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  for (int j = 0; j < k; ++j) {
    const double next = std::sqrt(2.0 / (j + 1)) * x * cur -
                        std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_polynomial(int k, double x) {
  require(k >= 0 && k <= kMaxDegree, "Hermite degree out of range");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - 2.0 * j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

const GridFunction& HermiteBasis::at(const std::array<int, 2>& alpha) const {
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i] == alpha) return functions[i];
  fail(ErrorCode::kInvalidArgument, "multi-index not in the Hermite basis");
}

HermiteBasis hermite_basis(int max_degree, const GridDomain& domain) {
  require(max_degree >= 0, "max_degree must be nonnegative");
  require(max_degree <= kMaxDegree, "max_degree above 200 overflows");
  require(!domain.periodic(), "the Hermite basis lives on a non-periodic grid");
  HermiteBasis basis;
  basis.dim = domain.dim();
  basis.max_degree = max_degree;

  const int m = domain.points_per_axis();
  // table[k][j] = phi_k(x_j)
  std::vector<std::vector<double>> table(max_degree + 1,
                                         std::vector<double>(m));
  for (int j = 0; j < m; ++j) {
    const double x = domain.coordinate(j);
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    table[0][j] = cur;
    for (int k = 0; k < max_degree; ++k) {
      const double next = std::sqrt(2.0 / (k + 1)) * x * cur -
                          std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
      table[k + 1][j] = cur;
    }
  }

  for (int total = 0; total <= max_degree; ++total) {
    if (domain.dim() == 1) {
      basis.indices.push_back({total, 0});
      basis.functions.emplace_back(domain, table[total]);
      continue;
    }
    for (int a0 = total; a0 >= 0; --a0) {
      const int a1 = total - a0;
      GridFunction f(domain);
      for (std::size_t c = 0; c < domain.size(); ++c) {
        const auto idx = domain.index(c);
        f[c] = table[a0][idx[0]] * table[a1][idx[1]];
      }
      basis.indices.push_back({a0, a1});
      basis.functions.push_back(std::move(f));
    }
  }
  return basis;
}

GridFunction hermite_ground_state(const GridDomain& domain) {
  const double scale = std::pow(std::numbers::pi, -0.25 * domain.dim());
  return sample(domain, [&](const std::array<double, 2>& x) {
    return scale * std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1]));
  });
}

}  // namespace stabcert
