#include "fourier.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

namespace stabcert::detail {

namespace {

using cplx = std::complex<double>;

// Planning is not thread-safe in FFTW; execution with new arrays is.
fftw_plan cached_plan(int rank, int m, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(rank, m, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  const std::size_t n = rank == 1 ? m : static_cast<std::size_t>(m) * m;
  std::vector<cplx> a(n), b(n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = rank == 1 ? fftw_plan_dft_1d(m, in, out, sign, flags)
                          : fftw_plan_dft_2d(m, m, in, out, sign, flags);
  if (!p) fail(ErrorCode::kNumerical, "FFT planning failed");
  plans.emplace(key, p);
  return p;
}

void execute(fftw_plan p, std::vector<cplx>& in, std::vector<cplx>& out) {
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

struct LineTransform {
  int m;
  double R;
  double h;
  std::vector<cplx> phase;  // e^{i pi q (1 - 1/m)}, q < m/2
  std::vector<cplx> buf_in, buf_out;

  LineTransform(const GridDomain& d)
      : m(d.points_per_axis()),
        R(d.half_width()),
        h(d.spacing()),
        phase(m / 2),
        buf_in(m),
        buf_out(m) {
    for (int q = 0; q < m / 2; ++q)
      phase[q] = std::polar(1.0, std::numbers::pi * q * (1.0 - 1.0 / m));
  }

  void forward(const double* in, std::ptrdiff_t in_stride, double* out,
               std::ptrdiff_t out_stride) {
    for (int j = 0; j < m; ++j) buf_in[j] = in[j * in_stride];
    execute(cached_plan(1, m, FFTW_FORWARD), buf_in, buf_out);
    const double scale = h / std::sqrt(2.0 * R);
    out[0] = scale * buf_out[0].real();
    for (int q = 1; q < m / 2; ++q) {
      const cplx c = scale * phase[q] * buf_out[q];
      out[(2 * q - 1) * out_stride] = std::numbers::sqrt2 * c.real();
      out[(2 * q) * out_stride] = -std::numbers::sqrt2 * c.imag();
    }
    out[(m - 1) * out_stride] = scale * buf_out[m / 2].real();
  }

  void inverse(const double* in, std::ptrdiff_t in_stride, double* out,
               std::ptrdiff_t out_stride) {
    const double r2 = std::sqrt(2.0 * R);
    const double r1 = std::sqrt(R);
    std::fill(buf_in.begin(), buf_in.end(), cplx(0.0, 0.0));
    buf_in[0] = in[0] / r2;
    for (int q = 1; q < m / 2; ++q) {
      const cplx ab(in[(2 * q - 1) * in_stride], -in[(2 * q) * in_stride]);
      buf_in[q] = ab * std::conj(phase[q]) / r1;
    }
    buf_in[m / 2] = in[(m - 1) * in_stride] / r2;
    execute(cached_plan(1, m, FFTW_BACKWARD), buf_in, buf_out);
    for (int j = 0; j < m; ++j) out[j * out_stride] = buf_out[j].real();
  }
};

}  // namespace

double native_axis_frequency(const GridDomain& d, int native) {
  const int m = d.points_per_axis();
  const double unit = std::numbers::pi / d.half_width();
  if (native == 0) return 0.0;
  if (native == m - 1) return unit * (m / 2);
  return unit * ((native + 1) / 2);
}

double native_frequency(const GridDomain& d, std::size_t native) {
  if (d.dim() == 1) return native_axis_frequency(d, static_cast<int>(native));
  const auto idx = d.index(native);
  return std::hypot(native_axis_frequency(d, idx[0]),
                    native_axis_frequency(d, idx[1]));
}

void real_forward(const GridDomain& d, const std::vector<double>& in,
                  std::vector<double>& out) {
  require(d.periodic(), "Fourier transforms need a periodic grid");
  require(in.size() == d.size(), "transform input has the wrong length");
  out.assign(d.size(), 0.0);
  LineTransform t(d);
  const int m = d.points_per_axis();
  if (d.dim() == 1) {
    t.forward(in.data(), 1, out.data(), 1);
    return;
  }
  std::vector<double> tmp(d.size());
  for (int i = 0; i < m; ++i)
    t.forward(in.data() + i * m, 1, tmp.data() + i * m, 1);
  for (int j = 0; j < m; ++j) t.forward(tmp.data() + j, m, out.data() + j, m);
}

void real_inverse(const GridDomain& d, const std::vector<double>& in,
                  std::vector<double>& out) {
  require(d.periodic(), "Fourier transforms need a periodic grid");
  require(in.size() == d.size(), "transform input has the wrong length");
  out.assign(d.size(), 0.0);
  LineTransform t(d);
  const int m = d.points_per_axis();
  if (d.dim() == 1) {
    t.inverse(in.data(), 1, out.data(), 1);
    return;
  }
  std::vector<double> tmp(d.size());
  for (int j = 0; j < m; ++j) t.inverse(in.data() + j, m, tmp.data() + j, m);
  for (int i = 0; i < m; ++i)
    t.inverse(tmp.data() + i * m, 1, out.data() + i * m, 1);
}

std::vector<double> axis_basis_table(const GridDomain& d) {
  const int m = d.points_per_axis();
  const double R = d.half_width();
  std::vector<double> table(static_cast<std::size_t>(m) * m);
  const double c0 = 1.0 / std::sqrt(2.0 * R);
  const double c1 = 1.0 / std::sqrt(R);
  for (int j = 0; j < m; ++j) {
    const double x = d.coordinate(j);
    double* row = table.data() + static_cast<std::size_t>(j) * m;
    row[0] = c0;
    for (int q = 1; q < m / 2; ++q) {
      const double arg = std::numbers::pi * q * x / R;
      row[2 * q - 1] = c1 * std::cos(arg);
      row[2 * q] = c1 * std::sin(arg);
    }
    row[m - 1] = (j % 2 == 0 ? c0 : -c0);
  }
  return table;
}

void complex_backward(const GridDomain& d, const std::vector<cplx>& in,
                      std::vector<cplx>& out) {
  require(in.size() == d.size(), "transform input has the wrong length");
  std::vector<cplx> a = in;
  out.assign(d.size(), cplx(0.0, 0.0));
  execute(cached_plan(d.dim(), d.points_per_axis(), FFTW_BACKWARD), a, out);
}

}  // namespace stabcert::detail
