#include "stabcert/domain.hpp"

#include <cmath>
#include <numbers>

#include "stabcert/geometry.hpp"

namespace stabcert {

GridDomain GridDomain::make(int dim, double half_width, int points_per_axis,
                            bool periodic) {
  require(dim == 1 || dim == 2, "dim must be 1 or 2");
  require(std::isfinite(half_width) && half_width > 0.0,
          "half_width must be positive");
  require(points_per_axis >= 8, "points_per_axis must be at least 8");
  require(points_per_axis % 2 == 0, "points_per_axis must be even");
  return GridDomain(dim, half_width, points_per_axis, periodic);
}

double GridDomain::cell_volume() const {
  return dim_ == 1 ? spacing() : spacing() * spacing();
}

std::size_t GridDomain::size() const {
  const auto m = static_cast<std::size_t>(points_per_axis_);
  return dim_ == 1 ? m : m * m;
}

double GridDomain::volume() const {
  const double w = 2.0 * half_width_;
  return dim_ == 1 ? w : w * w;
}

std::array<int, 2> GridDomain::index(std::size_t cell) const {
  if (dim_ == 1) return {static_cast<int>(cell), 0};
  const auto m = static_cast<std::size_t>(points_per_axis_);
  return {static_cast<int>(cell / m), static_cast<int>(cell % m)};
}

std::size_t GridDomain::flat(const std::array<int, 2>& idx) const {
  if (dim_ == 1) return static_cast<std::size_t>(idx[0]);
  return static_cast<std::size_t>(idx[0]) * points_per_axis_ + idx[1];
}

std::array<double, 2> GridDomain::center(std::size_t cell) const {
  const auto idx = index(cell);
  if (dim_ == 1) return {coordinate(idx[0]), 0.0};
  return {coordinate(idx[0]), coordinate(idx[1])};
}

double GridDomain::frequency(int bin) const {
  const int m = points_per_axis_;
  const int q = bin >= m / 2 ? bin - m : bin;
  return std::numbers::pi / half_width_ * q;
}

void require_same_domain(const GridDomain& a, const GridDomain& b) {
  if (!(a == b)) fail(ErrorCode::kDomainMismatch, "grid domains differ");
}

GridFunction::GridFunction(const GridDomain& d, std::vector<double> v)
    : domain(d), values(std::move(v)) {
  require(values.size() == d.size(),
          "grid function length does not match the cell count");
}

double inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_domain(f.domain, g.domain);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
  return sum * f.domain.cell_volume();
}

double norm(const GridFunction& f) {
  return std::sqrt(inner_product(f, f));
}

double restrict_norm(const GridFunction& f, const SetIndicator& e) {
  require_same_domain(f.domain, e.domain());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (e.contains(i)) sum += f[i] * f[i];
  return std::sqrt(sum * f.domain.cell_volume());
}

GridFunction operator+(const GridFunction& f, const GridFunction& g) {
  require_same_domain(f.domain, g.domain);
  GridFunction r(f.domain);
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = f[i] + g[i];
  return r;
}

GridFunction operator-(const GridFunction& f, const GridFunction& g) {
  require_same_domain(f.domain, g.domain);
  GridFunction r(f.domain);
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = f[i] - g[i];
  return r;
}

GridFunction operator*(double a, const GridFunction& f) {
  GridFunction r(f.domain);
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = a * f[i];
  return r;
}

GridFunction random_unit(const GridDomain& d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  GridFunction f(d);
  for (auto& v : f.values) v = normal(rng);
  const double n = norm(f);
  for (auto& v : f.values) v /= n;
  return f;
}

}  // namespace stabcert
