#include "iit/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace iit::kernels {

namespace {

constexpr std::size_t kReduceBlock = 1u << 14;
constexpr std::size_t kInnerBlock = 256;

std::size_t flat(const Shape3& s, std::size_t i0, std::size_t i1, std::size_t i2) {
  return (i0 * s.n[1] + i1) * s.n[2] + i2;
}

}  // namespace

std::size_t Shape3::outer(std::size_t axis) const noexcept {
  std::size_t p = 1;
  for (std::size_t a = 0; a < axis; ++a) p *= n[a];
  return p;
}

std::size_t Shape3::inner(std::size_t axis) const noexcept {
  std::size_t p = 1;
  for (std::size_t a = axis + 1; a < 3; ++a) p *= n[a];
  return p;
}

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

bool shear(std::span<const cplx> in, std::span<cplx> out, const Shape3& shape,
           std::size_t src_axis, std::size_t tgt_axis, std::span<const std::int64_t> shift,
           double threshold) {
  bool ok = true;
  const auto n_tgt = static_cast<std::int64_t>(shape.n[tgt_axis]);
  std::array<std::size_t, 3> idx{};
  for (idx[0] = 0; idx[0] < shape.n[0]; ++idx[0]) {
    for (idx[1] = 0; idx[1] < shape.n[1]; ++idx[1]) {
      for (idx[2] = 0; idx[2] < shape.n[2]; ++idx[2]) {
        const cplx v = in[flat(shape, idx[0], idx[1], idx[2])];
        const std::int64_t j = static_cast<std::int64_t>(idx[tgt_axis]) + shift[idx[src_axis]];
        if (j < 0 || j >= n_tgt) {
          if (std::abs(v) > threshold) ok = false;
          continue;
        }
        auto dst = idx;
        dst[tgt_axis] = static_cast<std::size_t>(j);
        out[flat(shape, dst[0], dst[1], dst[2])] = v;
      }
    }
  }
  return ok;
}

void add_outer(std::span<cplx> out, cplx coef, std::span<const cplx> f,
               std::span<const cplx> g, std::span<const cplx> h) {
  if (h.empty()) {
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) out[i * g.size() + j] += coef * f[i] * g[j];
    return;
  }
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      for (std::size_t k = 0; k < h.size(); ++k)
        out[(i * g.size() + j) * h.size() + k] += coef * f[i] * g[j] * h[k];
}

SpanCoefficients project_axis(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                              std::span<const cplx> plus, std::span<const cplx> minus,
                              double weight) {
  const std::size_t outer = shape.outer(axis);
  const std::size_t inner = shape.inner(axis);
  const std::size_t n = shape.n[axis];
  SpanCoefficients c{std::vector<cplx>(outer * inner), std::vector<cplx>(outer * inner)};
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < inner; ++k) {
      cplx sp{};
      cplx sm{};
      for (std::size_t i = 0; i < n; ++i) {
        const cplx v = psi[(o * n + i) * inner + k];
        sp += std::conj(plus[i]) * v;
        sm += std::conj(minus[i]) * v;
      }
      c.plus[o * inner + k] = sp * weight;
      c.minus[o * inner + k] = sm * weight;
    }
  return c;
}

std::vector<double> marginal(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                             double weight) {
  const std::size_t outer = shape.outer(axis);
  const std::size_t inner = shape.inner(axis);
  const std::size_t n = shape.n[axis];
  std::vector<double> p(n, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < inner; ++k) p[i] += std::norm(psi[(o * n + i) * inner + k]);
  for (auto& v : p) v *= weight;
  return p;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

void weighted_shift(std::span<const double> weight, std::span<const std::int64_t> shift,
                    std::span<const cplx> carrier, std::span<cplx> out) {
  const auto n = static_cast<std::int64_t>(carrier.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    cplx s{};
    for (std::size_t i = 0; i < weight.size(); ++i) {
      const std::int64_t k = static_cast<std::int64_t>(j) - shift[i];
      if (k >= 0 && k < n) s += weight[i] * carrier[static_cast<std::size_t>(k)];
    }
    out[j] = s;
  }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace parallel {

bool shear(std::span<const cplx> in, std::span<cplx> out, const Shape3& shape,
           std::size_t src_axis, std::size_t tgt_axis, std::span<const std::int64_t> shift,
           double threshold) {
  bool overflow = false;
  const auto n_tgt = static_cast<std::int64_t>(shape.n[tgt_axis]);
  const auto n0 = static_cast<std::int64_t>(shape.n[0]);
  // The map is a permutation of the surviving samples, so writes never collide.
#pragma omp parallel for schedule(static) reduction(|| : overflow)
  for (std::int64_t i0 = 0; i0 < n0; ++i0) {
    std::array<std::size_t, 3> idx{static_cast<std::size_t>(i0), 0, 0};
    for (idx[1] = 0; idx[1] < shape.n[1]; ++idx[1]) {
      for (idx[2] = 0; idx[2] < shape.n[2]; ++idx[2]) {
        const cplx v = in[flat(shape, idx[0], idx[1], idx[2])];
        const std::int64_t j = static_cast<std::int64_t>(idx[tgt_axis]) + shift[idx[src_axis]];
        if (j < 0 || j >= n_tgt) {
          if (std::abs(v) > threshold) overflow = true;
          continue;
        }
        auto dst = idx;
        dst[tgt_axis] = static_cast<std::size_t>(j);
        out[flat(shape, dst[0], dst[1], dst[2])] = v;
      }
    }
  }
  return !overflow;
}

void add_outer(std::span<cplx> out, cplx coef, std::span<const cplx> f,
               std::span<const cplx> g, std::span<const cplx> h) {
  const auto nf = static_cast<std::int64_t>(f.size());
  const std::size_t ng = g.size();
  const std::size_t nh = h.empty() ? 1 : h.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < nf; ++i) {
    const cplx fi = coef * f[static_cast<std::size_t>(i)];
    cplx* row = out.data() + static_cast<std::size_t>(i) * ng * nh;
    for (std::size_t j = 0; j < ng; ++j) {
      const cplx fg = fi * g[j];
      if (h.empty()) {
        row[j] += fg;
      } else {
        for (std::size_t k = 0; k < nh; ++k) row[j * nh + k] += fg * h[k];
      }
    }
  }
}

SpanCoefficients project_axis(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                              std::span<const cplx> plus, std::span<const cplx> minus,
                              double weight) {
  const std::size_t outer = shape.outer(axis);
  const std::size_t inner = shape.inner(axis);
  const std::size_t n = shape.n[axis];
  const std::size_t kblocks = (inner + kInnerBlock - 1) / kInnerBlock;
  SpanCoefficients c{std::vector<cplx>(outer * inner), std::vector<cplx>(outer * inner)};
  const auto tasks = static_cast<std::int64_t>(outer * kblocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < tasks; ++t) {
    const std::size_t o = static_cast<std::size_t>(t) / kblocks;
    const std::size_t k0 = (static_cast<std::size_t>(t) % kblocks) * kInnerBlock;
    const std::size_t k1 = std::min(inner, k0 + kInnerBlock);
    cplx* cp = c.plus.data() + o * inner;
    cplx* cm = c.minus.data() + o * inner;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx bp = std::conj(plus[i]) * weight;
      const cplx bm = std::conj(minus[i]) * weight;
      const cplx* row = psi.data() + (o * n + i) * inner;
      for (std::size_t k = k0; k < k1; ++k) {
        cp[k] += bp * row[k];
        cm[k] += bm * row[k];
      }
    }
  }
  return c;
}

std::vector<double> marginal(std::span<const cplx> psi, const Shape3& shape, std::size_t axis,
                             double weight) {
  const std::size_t outer = shape.outer(axis);
  const std::size_t inner = shape.inner(axis);
  const auto n = static_cast<std::int64_t>(shape.n[axis]);
  std::vector<double> p(shape.n[axis], 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t o = 0; o < outer; ++o) {
      const cplx* row =
          psi.data() + (o * shape.n[axis] + static_cast<std::size_t>(i)) * inner;
      for (std::size_t k = 0; k < inner; ++k) s += std::norm(row[k]);
    }
    p[static_cast<std::size_t>(i)] = s * weight;
  }
  return p;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  const std::size_t blocks = (a.size() + kReduceBlock - 1) / kReduceBlock;
  std::vector<cplx> partial(blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(blocks); ++bi) {
    const std::size_t lo = static_cast<std::size_t>(bi) * kReduceBlock;
    const std::size_t hi = std::min(a.size(), lo + kReduceBlock);
    cplx s{};
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(a[i]) * b[i];
    partial[static_cast<std::size_t>(bi)] = s;
  }
  cplx total{};
  for (const auto& s : partial) total += s;
  return total;
}

void weighted_shift(std::span<const double> weight, std::span<const std::int64_t> shift,
                    std::span<const cplx> carrier, std::span<cplx> out) {
  const auto n = static_cast<std::int64_t>(carrier.size());
  const auto m = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < m; ++j) {
    cplx s{};
    for (std::size_t i = 0; i < weight.size(); ++i) {
      if (weight[i] == 0.0) continue;
      const std::int64_t k = j - shift[i];
      if (k >= 0 && k < n) s += weight[i] * carrier[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(j)] = s;
  }
}

}  // namespace parallel

}  // namespace iit::kernels
