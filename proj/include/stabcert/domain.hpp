#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <vector>

#include "stabcert/error.hpp"

namespace stabcert {

class SetIndicator;

// Uniform grid on the box [-R, R]^dim with m cells per axis. Grid values live
// at cell centers x_i = -R + (i + 1/2) h, h = 2R / m, and the cell index is
// row-major with axis 0 slowest.
class GridDomain {
 public:
  static GridDomain make(int dim, double half_width, int points_per_axis,
                         bool periodic);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points_per_axis() const { return points_per_axis_; }
  bool periodic() const { return periodic_; }

  double spacing() const { return 2.0 * half_width_ / points_per_axis_; }
  double cell_volume() const;
  std::size_t size() const;
  // Box measure (2R)^dim.
  double volume() const;

  double coordinate(int axis_index) const {
    return -half_width_ + (axis_index + 0.5) * spacing();
  }
  std::array<int, 2> index(std::size_t cell) const;
  std::size_t flat(const std::array<int, 2>& index) const;
  // Cell center; unused trailing components are zero.
  std::array<double, 2> center(std::size_t cell) const;

  // Angular frequency (pi / R) * q of FFT bin q in [0, m), with bins
  // q >= m/2 mapped to q - m. The lattice is (pi/R) * {-m/2, ..., m/2 - 1}.
  double frequency(int bin) const;

  bool operator==(const GridDomain& other) const = default;

 private:
  GridDomain(int dim, double half_width, int points_per_axis, bool periodic)
      : dim_(dim),
        half_width_(half_width),
        points_per_axis_(points_per_axis),
        periodic_(periodic) {}

  int dim_;
  double half_width_;
  int points_per_axis_;
  bool periodic_;
};

void require_same_domain(const GridDomain& a, const GridDomain& b);

// Real-valued grid function. All operators in this library are real, so real
// storage is sufficient; Fourier coefficients are exposed separately.
struct GridFunction {
  GridDomain domain;
  std::vector<double> values;

  GridFunction(const GridDomain& d) : domain(d), values(d.size(), 0.0) {}
  GridFunction(const GridDomain& d, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Discrete L2 inner product: sum of f g h^n.
double inner_product(const GridFunction& f, const GridFunction& g);
double norm(const GridFunction& f);
// L2 norm over the cells of e.
double restrict_norm(const GridFunction& f, const SetIndicator& e);

GridFunction operator+(const GridFunction& f, const GridFunction& g);
GridFunction operator-(const GridFunction& f, const GridFunction& g);
GridFunction operator*(double a, const GridFunction& f);

// Samples a callable x -> value at every cell center.
template <class Fn>
GridFunction sample(const GridDomain& d, Fn&& fn) {
  GridFunction f(d);
  for (std::size_t c = 0; c < d.size(); ++c) f[c] = fn(d.center(c));
  return f;
}

// Unit-norm function with i.i.d. standard normal cell values before scaling.
GridFunction random_unit(const GridDomain& d, std::mt19937_64& rng);

}  // namespace stabcert
