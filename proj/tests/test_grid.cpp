#include <cmath>
#include <numbers>

#include "doctest.h"

#include "iit/grid.hpp"

using namespace iit;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an iit::Error");
  return Errc::Io;
}

// Independent overlap of two density-convention Gaussians by a fine composite Simpson rule.
double simpson_gaussian_overlap(double m1, double m2, double v) {
  const double lo = std::min(m1, m2) - 20.0;
  const double hi = std::max(m1, m2) + 20.0;
  const int n = 20000;
  const double h = (hi - lo) / n;
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * v);
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + h * k;
    const double f = c * std::exp(-(x - m1) * (x - m1) / (4 * v) - (x - m2) * (x - m2) / (4 * v));
    s += f * (k == 0 || k == n ? 1 : (k % 2 ? 4 : 2));
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("make_grid lays points on the spacing lattice") {
  const auto g = make_grid(-8, 8, 129);
  CHECK(g.spacing() == 0.125);
  CHECK(g.min() == -8.0);
  CHECK(g.point(128) == 8.0);
  CHECK(g.origin() == -64);

  const auto unit = make_grid(0, 1, 2);
  CHECK(unit.point(0) == 0.0);
  CHECK(unit.point(1) == 1.0);

  CHECK(code_of([] { make_grid(1, 0, 10); }) == Errc::InvalidBounds);
  CHECK(code_of([] { make_grid(0, 1, 1); }) == Errc::InvalidBounds);
  CHECK(code_of([] { make_grid(0.05, 1.05, 11); }) == Errc::LatticeMisaligned);
}

TEST_CASE("gaussian_wf normalization, moments and errors") {
  const auto g = make_grid(-8, 8, 257);
  const auto f = gaussian_wf(g, 0, 1);
  CHECK(norm(f) == doctest::Approx(1.0).epsilon(1e-9));
  const auto m = density_moments(gaussian_wf(g, 0.5, 1.0));
  CHECK(std::abs(m.mean - 0.5) < 1e-4);
  CHECK(std::abs(m.variance - 1.0) < 1e-4);

  CHECK(code_of([&] { gaussian_wf(g, 0, -1); }) == Errc::NonPositiveVariance);
  CHECK(code_of([&] { gaussian_wf(g, 0, 0); }) == Errc::NonPositiveVariance);
  CHECK(code_of([&] { gaussian_wf(g, 3, 1); }) == Errc::GridTooNarrow);

  SUBCASE("amplitude convention halves the density variance") {
    const auto a = gaussian_wf(g, 0, 1, VarianceConvention::Amplitude);
    CHECK(std::abs(density_moments(a).variance - 0.5) < 1e-4);
  }
}

TEST_CASE("bump_wf is exactly zero off its support") {
  const auto g = make_grid(-8, 8, 257);
  const auto p = bump_wf(g, {-3, -1});
  const auto m = bump_wf(g, {1, 3});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double q = g.point(i);
    if (q <= -3 || q >= -1) CHECK(p[i] == cplx{0.0, 0.0});
  }
  CHECK(p[64] == cplx{0.0, 0.0});   // q = -4
  CHECK(p[128] == cplx{0.0, 0.0});  // q = 0
  CHECK(norm(p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(inner(p, m) == cplx{0.0, 0.0});
  CHECK(code_of([&] { bump_wf(g, {-9, -1}); }) == Errc::SupportOutsideGrid);
  CHECK(code_of([&] { bump_wf(g, {-8, -1}); }) == Errc::SupportOutsideGrid);
}

TEST_CASE("superpose and inner") {
  const auto g = make_grid(-8, 8, 257);
  const auto p = bump_wf(g, {-3, -1});
  const auto m = bump_wf(g, {1, 3});

  const auto id = superpose(1, p, 0, m);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(id[i] == p[i]);

  const double r = 1 / std::sqrt(2.0);
  CHECK(norm(superpose(r, p, r, m)) == doctest::Approx(1.0).epsilon(1e-9));
  const auto twice = superpose(r, p, r, p);
  CHECK(norm(twice) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const auto other = make_grid(-8, 8, 129);
  CHECK(code_of([&] { superpose(1, p, 1, bump_wf(other, {1, 3})); }) == Errc::GridMismatch);
  CHECK(code_of([&] { inner(p, bump_wf(other, {1, 3})); }) == Errc::GridMismatch);

  const auto f = gaussian_wf(g, 0, 1);
  CHECK(inner(f, f).real() == doctest::Approx(1.0).epsilon(1e-12));
  const auto h = gaussian_wf(g, 2, 1);
  const double expected = std::exp(-0.5);
  CHECK(std::abs(inner(f, h).real() - expected) < 1e-6);
  CHECK(std::abs(simpson_gaussian_overlap(0, 2, 1) - expected) < 1e-10);
}

TEST_CASE("inner product properties over constructed pairs") {
  const auto g = make_grid(-8, 8, 257);
  const std::vector<Wavefunction> fs{
      gaussian_wf(g, 0, 1), gaussian_wf(g, 1, 0.5), bump_wf(g, {-3, -1}),
      bump_wf(g, {-1.5, 2}), superpose({0.6, 0.2}, gaussian_wf(g, -1, 1), {0.1, -0.7}, bump_wf(g, {0, 2}))};
  const cplx a{0.3, -1.2};
  for (const auto& f : fs) {
    for (const auto& h : fs) {
      CHECK(std::abs(inner(f, h) - std::conj(inner(h, f))) < 1e-12);
      CHECK(std::abs(inner(f, h)) <= norm(f) * norm(h) + 1e-12);
      CHECK(std::abs(inner(f.scaled(a), h) - std::conj(a) * inner(f, h)) < 1e-12);
    }
  }
}

TEST_CASE("normalize") {
  const auto g = make_grid(-8, 8, 257);
  const auto f = superpose(0.3, gaussian_wf(g, 0, 1), 0.4, bump_wf(g, {1, 3}));
  const auto a = normalize(f);
  const auto b = normalize(f.scaled(2.0));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  CHECK(code_of([&] { normalize(Wavefunction::zero(g)); }) == Errc::ZeroNorm);
}

TEST_CASE("wavefunction rejects non-finite amplitudes and wrong sizes") {
  const auto g = make_grid(0, 1, 3);
  CHECK(code_of([&] { Wavefunction(g, {1.0, NAN, 0.0}); }) == Errc::NonFinite);
  CHECK(code_of([&] { Wavefunction(g, {1.0, 0.0}); }) == Errc::GridMismatch);
}
