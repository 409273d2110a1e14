#pragma once

#include <complex>
#include <vector>

#include "stabcert/domain.hpp"

namespace stabcert::detail {

// Real orthonormal Fourier basis of a periodic grid, per axis of m cells:
//   native index 0      constant 1/sqrt(2R)
//   native index 2q-1   cos(pi q x / R) / sqrt(R),  1 <= q < m/2
//   native index 2q     sin(pi q x / R) / sqrt(R),  1 <= q < m/2
//   native index m-1    (-1)^j / sqrt(2R)           (frequency pi m / (2R))
// In 2D the native index is row-major over the per-axis indices and modes
// are tensor products. Orthonormal in the h^n-weighted inner product.

// Angular frequency of a native per-axis index.
double native_axis_frequency(const GridDomain& d, int native);
// |xi| of a native (possibly 2D) index.
double native_frequency(const GridDomain& d, std::size_t native);

// Cell values -> native coefficients.
void real_forward(const GridDomain& d, const std::vector<double>& in,
                  std::vector<double>& out);
// Native coefficients -> cell values.
void real_inverse(const GridDomain& d, const std::vector<double>& in,
                  std::vector<double>& out);

// Per-axis table B[j * m + k] = value of native mode k at cell j.
std::vector<double> axis_basis_table(const GridDomain& d);

// Unnormalized backward DFT over the grid's lattice:
// out[j] = sum_q in[q] e^{+2 pi i q.j / m}, in/out row-major.
void complex_backward(const GridDomain& d,
                      const std::vector<std::complex<double>>& in,
                      std::vector<std::complex<double>>& out);

}  // namespace stabcert::detail
