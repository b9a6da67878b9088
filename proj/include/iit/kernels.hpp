#pragma once

// Data-parallel inner loops behind TensorState and the effective-state
// construction. Each kernel exists twice: `serial` is the plain reference
// loop kept for testing and benchmarking, `parallel` is the OpenMP version
// the library dispatches to.
//
// Reductions in `parallel` are summed over fixed-size blocks and combined
// in block order, so results do not depend on the thread count.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace iit::kernels {

using cplx = std::complex<double>;

/// Row-major extents of a rank-2 or rank-3 array; rank-2 arrays use n[2] = 1.
struct Shape3 {
  std::array<std::size_t, 3> n{1, 1, 1};

  std::size_t size() const noexcept { return n[0] * n[1] * n[2]; }
  /// Elements before / after `axis` in row-major order.
  std::size_t outer(std::size_t axis) const noexcept;
  std::size_t inner(std::size_t axis) const noexcept;
};

/// c_s[o * inner + k] = sum_i conj(basis_s[i]) * psi[o, i, k] * weight
struct SpanCoefficients {
  std::vector<cplx> plus;
  std::vector<cplx> minus;
};

namespace serial {

/// out[.., j + shift[i_src], ..] = in[.., j, ..]. `out` must be zero-filled.
/// Returns false if an amplitude with modulus above `threshold` would leave the target axis.
bool shear(std::span<const cplx> in, std::span<cplx> out, const Shape3& shape,
           std::size_t src_axis, std::size_t tgt_axis, std::span<const std::int64_t> shift,
           double threshold);

/// out += coef * f (x) g (x) h; pass an empty h for rank 2.
void add_outer(std::span<cplx> out, cplx coef, std::span<const cplx> f,
               std::span<const cplx> g, std::span<const cplx> h);

SpanCoefficients project_axis(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                              std::span<const cplx> plus, std::span<const cplx> minus,
                              double weight);

/// Sum of |psi|^2 over every axis except `axis`, times weight.
std::vector<double> marginal(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                             double weight);

/// sum conj(a) * b, unweighted.
cplx dot(std::span<const cplx> a, std::span<const cplx> b);

/// out[j] = sum_i weight[i] * carrier[j - shift[i]], off-grid carrier samples count as zero.
void weighted_shift(std::span<const double> weight, std::span<const std::int64_t> shift,
                    std::span<const cplx> carrier, std::span<cplx> out);

}  // namespace serial

namespace parallel {

bool shear(std::span<const cplx> in, std::span<cplx> out, const Shape3& shape,
           std::size_t src_axis, std::size_t tgt_axis, std::span<const std::int64_t> shift,
           double threshold);

void add_outer(std::span<cplx> out, cplx coef, std::span<const cplx> f,
               std::span<const cplx> g, std::span<const cplx> h);

SpanCoefficients project_axis(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                              std::span<const cplx> plus, std::span<const cplx> minus,
                              double weight);

std::vector<double> marginal(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                             double weight);

cplx dot(std::span<const cplx> a, std::span<const cplx> b);

void weighted_shift(std::span<const double> weight, std::span<const std::int64_t> shift,
                    std::span<const cplx> carrier, std::span<cplx> out);

}  // namespace parallel

}  // namespace iit::kernels
