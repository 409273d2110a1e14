#include "stabcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace stabcert {

SetIndicator::SetIndicator(const GridDomain& d, std::vector<std::uint8_t> cells)
    : domain_(d), cells_(std::move(cells)) {
  require(cells_.size() == d.size(), "set bitmap length does not match grid");
  for (auto& c : cells_) c = c ? 1 : 0;
}

std::size_t SetIndicator::count() const {
  return static_cast<std::size_t>(
      std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

double SetIndicator::measure() const {
  return static_cast<double>(count()) * domain_.cell_volume();
}

SetIndicator SetIndicator::complement() const {
  std::vector<std::uint8_t> c(cells_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cells_[i] ? 0 : 1;
  return SetIndicator(domain_, std::move(c));
}

SetIndicator SetIndicator::intersect(const SetIndicator& other) const {
  require_same_domain(domain_, other.domain_);
  std::vector<std::uint8_t> c(cells_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cells_[i] & other.cells_[i];
  return SetIndicator(domain_, std::move(c));
}

bool SetIndicator::subset_of(const SetIndicator& other) const {
  require_same_domain(domain_, other.domain_);
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i] && !other.cells_[i]) return false;
  return true;
}

namespace {

struct ShapeRasterizer {
  const GridDomain& d;

  std::vector<std::uint8_t> operator()(const shape::Full&) const {
    return std::vector<std::uint8_t>(d.size(), 1);
  }
  std::vector<std::uint8_t> operator()(const shape::Empty&) const {
    return std::vector<std::uint8_t>(d.size(), 0);
  }
  std::vector<std::uint8_t> operator()(const shape::HalfSpace& h) const {
    require(h.axis >= 0 && h.axis < d.dim(), "half-space axis out of range");
    require(std::abs(h.offset) < d.half_width(),
            "half-space offset outside the box");
    std::vector<std::uint8_t> c(d.size());
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = d.center(i)[h.axis] > h.offset;
    return c;
  }
  std::vector<std::uint8_t> operator()(const shape::BallComplement& b) const {
    require(b.radius > 0.0, "ball radius must be positive");
    std::vector<std::uint8_t> c(d.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto x = d.center(i);
      const double dx = x[0] - b.center[0];
      const double dy = d.dim() == 2 ? x[1] - b.center[1] : 0.0;
      c[i] = dx * dx + dy * dy >= b.radius * b.radius;
    }
    return c;
  }
  std::vector<std::uint8_t> operator()(const shape::PeriodicSlabs& p) const {
    require(p.period > 0.0, "slab period must be positive");
    require(p.fill_fraction > 0.0 && p.fill_fraction <= 1.0,
            "fill fraction must lie in (0, 1]");
    std::vector<std::uint8_t> c(d.size());
    const double width = p.fill_fraction * p.period;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double x = d.center(i)[0];
      const double r = x - std::floor(x / p.period) * p.period;
      c[i] = r < width;
    }
    return c;
  }
  std::vector<std::uint8_t> operator()(const shape::Custom& cu) const {
    std::vector<std::uint8_t> c(d.size(), 0);
    for (auto i : cu.cells) {
      require(i < d.size(), "custom cell index out of range");
      c[i] = 1;
    }
    return c;
  }
};

std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    require(eq != std::string::npos, "expected key=value in '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double to_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    require(used == value.size(), "");
    return v;
  } catch (...) {
    fail(ErrorCode::kInvalidArgument,
         "bad number for '" + key + "': '" + value + "'");
  }
}

double take(std::map<std::string, std::string>& p, const std::string& key,
            double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  const double v = to_number(key, it->second);
  p.erase(it);
  return v;
}

void no_leftovers(const std::map<std::string, std::string>& p,
                  const std::string& kind) {
  if (!p.empty())
    fail(ErrorCode::kInvalidArgument,
         "unknown parameter '" + p.begin()->first + "' for " + kind);
}

}  // namespace

SetIndicator make_set(const GridDomain& d, const Shape& s) {
  return SetIndicator(d, std::visit(ShapeRasterizer{d}, s));
}

Shape parse_shape(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  auto p = parse_params(colon == std::string::npos ? ""
                                                   : text.substr(colon + 1));
  if (kind == "full") {
    no_leftovers(p, kind);
    return shape::Full{};
  }
  if (kind == "empty") {
    no_leftovers(p, kind);
    return shape::Empty{};
  }
  if (kind == "halfspace") {
    shape::HalfSpace h;
    h.axis = static_cast<int>(take(p, "axis", 0));
    h.offset = take(p, "offset", 0.0);
    no_leftovers(p, kind);
    return h;
  }
  if (kind == "ball-complement") {
    shape::BallComplement b;
    b.radius = take(p, "radius", 1.0);
    b.center = {take(p, "cx", 0.0), take(p, "cy", 0.0)};
    no_leftovers(p, kind);
    return b;
  }
  if (kind == "slabs") {
    shape::PeriodicSlabs s;
    s.period = take(p, "period", 1.0);
    s.fill_fraction = take(p, "fill", 0.25);
    no_leftovers(p, kind);
    return s;
  }
  if (kind == "custom") {
    shape::Custom c;
    auto it = p.find("cells");
    if (it != p.end()) {
      std::stringstream ss(it->second);
      std::string item;
      while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        const double v = to_number("cells", item);
        require(v >= 0 && v == std::floor(v), "cell index must be integral");
        c.cells.push_back(static_cast<std::size_t>(v));
      }
      p.erase(it);
    }
    no_leftovers(p, kind);
    return c;
  }
  fail(ErrorCode::kInvalidArgument, "unknown set shape '" + kind + "'");
}

std::string describe(const Shape& s) {
  struct V {
    std::string operator()(const shape::Full&) const { return "full"; }
    std::string operator()(const shape::Empty&) const { return "empty"; }
    std::string operator()(const shape::HalfSpace& h) const {
      std::ostringstream o;
      o.precision(17);
      o << "halfspace:axis=" << h.axis << ",offset=" << h.offset;
      return o.str();
    }
    std::string operator()(const shape::BallComplement& b) const {
      std::ostringstream o;
      o.precision(17);
      o << "ball-complement:radius=" << b.radius << ",cx=" << b.center[0]
        << ",cy=" << b.center[1];
      return o.str();
    }
    std::string operator()(const shape::PeriodicSlabs& p) const {
      std::ostringstream o;
      o.precision(17);
      o << "slabs:period=" << p.period << ",fill=" << p.fill_fraction;
      return o.str();
    }
    std::string operator()(const shape::Custom& c) const {
      std::string out = "custom:cells=";
      for (std::size_t i = 0; i < c.cells.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(c.cells[i]);
      }
      return out;
    }
  };
  return std::visit(V{}, s);
}

namespace {

// Window sums of width w along one axis of a 1D line, with wrap or clipped.
// Returns sums for every window start (wrap) or every in-box start.
std::vector<long> window_sums(const std::vector<long>& line, int w,
                              bool wrap) {
  const int m = static_cast<int>(line.size());
  std::vector<long> prefix(2 * m + 1, 0);
  for (int i = 0; i < 2 * m; ++i) prefix[i + 1] = prefix[i] + line[i % m];
  const int starts = wrap ? m : m - w + 1;
  std::vector<long> out(std::max(starts, 0));
  for (int s = 0; s < starts; ++s) out[s] = prefix[s + w] - prefix[s];
  return out;
}

}  // namespace

ThicknessReport check_thick(const SetIndicator& e,
                            const std::vector<double>& side_lengths) {
  const GridDomain& d = e.domain();
  const int m = d.points_per_axis();
  const double h = d.spacing();
  const bool wrap = d.periodic();
  require(!side_lengths.empty(), "no side lengths to test");

  ThicknessReport report;
  report.truncated = !wrap;
  double worst_gamma = std::numeric_limits<double>::infinity();

  for (double requested : side_lengths) {
    require(requested > 0.0, "side lengths must be positive");
    // Cubes are whole cells wide.
    const int w = std::max(1, static_cast<int>(std::lround(requested / h)));
    require(w <= m, "side length exceeds the box");
    const double L = w * h;

    double min_count = std::numeric_limits<double>::infinity();
    std::array<double, 2> where{0.0, 0.0};
    auto center_of = [&](int start) {
      // Cube covers cells start..start+w-1; its center in coordinates.
      double c = -d.half_width() + (start + 0.5 * w) * h;
      if (wrap && c >= d.half_width()) c -= 2.0 * d.half_width();
      return c;
    };

    if (d.dim() == 1) {
      std::vector<long> line(m);
      for (int i = 0; i < m; ++i) line[i] = e.contains(i);
      const auto sums = window_sums(line, w, wrap);
      for (std::size_t s = 0; s < sums.size(); ++s) {
        if (sums[s] < min_count) {
          min_count = static_cast<double>(sums[s]);
          where = {center_of(static_cast<int>(s)), 0.0};
        }
      }
    } else {
      // Sum along axis 1 first, then along axis 0.
      std::vector<std::vector<long>> rows(m);
      for (int i = 0; i < m; ++i) {
        std::vector<long> line(m);
        for (int j = 0; j < m; ++j) line[j] = e.contains(d.flat({i, j}));
        rows[i] = window_sums(line, w, wrap);
      }
      const std::size_t starts = rows[0].size();
      for (std::size_t s1 = 0; s1 < starts; ++s1) {
        std::vector<long> col(m);
        for (int i = 0; i < m; ++i) col[i] = rows[i][s1];
        const auto sums = window_sums(col, w, wrap);
        for (std::size_t s0 = 0; s0 < sums.size(); ++s0) {
          if (sums[s0] < min_count) {
            min_count = static_cast<double>(sums[s0]);
            where = {center_of(static_cast<int>(s0)),
                     center_of(static_cast<int>(s1))};
          }
        }
      }
    }

    const double cube = d.dim() == 1 ? L : L * L;
    const double gamma = min_count * d.cell_volume() / cube;
    report.side_lengths.push_back(L);
    report.gammas.push_back(gamma);
    if (!report.is_thick && gamma > 0.0) {
      report.is_thick = true;
      report.gamma = gamma;
      report.side_length = L;
      report.worst_cube_center = where;
    }
    if (!report.is_thick && gamma < worst_gamma) {
      worst_gamma = gamma;
      report.worst_cube_center = where;
    }
  }
  return report;
}

WeakThicknessReport check_weakly_thick(const SetIndicator& e,
                                       const std::vector<double>& radii) {
  const GridDomain& d = e.domain();
  require(!radii.empty(), "no radii to test");
  WeakThicknessReport report;
  report.caveat =
      "finite box: densities are measured for radii up to the box half-width "
      "and the limit inferior is approximated by the minimum over the upper "
      "half of the tested radii";
  double previous = 0.0;
  for (double r : radii) {
    require(r > 0.0 && r <= d.half_width() * (1.0 + 1e-12),
            "radius must lie in (0, R]");
    require(r >= previous, "radii must be ascending");
    previous = r;
    std::size_t inside = 0, hit = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto x = d.center(i);
      if (x[0] * x[0] + x[1] * x[1] <= r * r) {
        ++inside;
        hit += e.contains(i);
      }
    }
    report.radii.push_back(r);
    report.densities.push_back(inside ? static_cast<double>(hit) / inside
                                      : 0.0);
  }
  const std::size_t from = report.densities.size() / 2;
  report.liminf_proxy = *std::min_element(report.densities.begin() + from,
                                          report.densities.end());
  return report;
}

}  // namespace stabcert
