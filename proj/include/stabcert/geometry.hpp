#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stabcert/domain.hpp"

namespace stabcert {

// A measurable set rasterized on a grid: one flag per cell.
class SetIndicator {
 public:
  SetIndicator(const GridDomain& d, std::vector<std::uint8_t> cells);

  const GridDomain& domain() const { return domain_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }
  bool contains(std::size_t cell) const { return cells_[cell] != 0; }

  std::size_t count() const;
  double measure() const;
  bool is_empty() const { return count() == 0; }
  bool is_full() const { return count() == cells_.size(); }

  SetIndicator complement() const;
  SetIndicator intersect(const SetIndicator& other) const;
  bool subset_of(const SetIndicator& other) const;

  bool operator==(const SetIndicator& other) const = default;

 private:
  GridDomain domain_;
  std::vector<std::uint8_t> cells_;
};

namespace shape {
struct Full {};
struct Empty {};
// {x : x[axis] > offset}
struct HalfSpace {
  int axis = 0;
  double offset = 0.0;
};
// {x : |x - center| >= radius}
struct BallComplement {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 1.0;
};
// {x : (x[0] mod period) < fill_fraction * period}
struct PeriodicSlabs {
  double period = 1.0;
  double fill_fraction = 0.25;
};
struct Custom {
  std::vector<std::size_t> cells;
};
}  // namespace shape

using Shape = std::variant<shape::Full, shape::Empty, shape::HalfSpace,
                           shape::BallComplement, shape::PeriodicSlabs,
                           shape::Custom>;

// Rasterizes a fixture by cell-center membership.
SetIndicator make_set(const GridDomain& d, const Shape& s);

// Parses "full", "empty", "halfspace:axis=0,offset=0",
// "ball-complement:radius=1,cx=0,cy=0", "slabs:period=1,fill=0.25",
// "custom:cells=1;2;3".
Shape parse_shape(const std::string& text);
std::string describe(const Shape& s);

struct ThicknessReport {
  bool is_thick = false;
  std::optional<double> gamma;
  std::optional<double> side_length;
  std::array<double, 2> worst_cube_center{0.0, 0.0};
  // gamma(L) for every tested side length, in input order. Side lengths are
  // rounded to whole cells; the rounded values are reported.
  std::vector<double> side_lengths;
  std::vector<double> gammas;
  // Non-periodic grids only test cubes inside the box.
  bool truncated = false;
};

// Min over grid-aligned cube positions of |E cap Q_L(x)| / L^n, for each L.
// Periodic grids wrap cubes around the torus.
ThicknessReport check_thick(const SetIndicator& e,
                            const std::vector<double>& side_lengths);

struct WeakThicknessReport {
  std::vector<double> radii;
  std::vector<double> densities;
  // Minimum density over the upper half of the tested radii; a finite-box
  // stand-in for the liminf as R -> infinity.
  double liminf_proxy = 0.0;
  std::string caveat;
};

WeakThicknessReport check_weakly_thick(const SetIndicator& e,
                                       const std::vector<double>& radii);

}  // namespace stabcert
