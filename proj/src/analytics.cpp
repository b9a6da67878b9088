#include "iit/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "iit/error.hpp"

namespace iit {

namespace {

constexpr double kCoefficientTol = 1e-9;
constexpr double kDegenerateTol = 1e-12;
constexpr double kInversionTol = 1e-8;
constexpr int kMaxBisection = 200;
constexpr double kAsymptoteG = 1e6;
constexpr double kMaxBracketG = 1e9;
// Half-width of every quadrature window in standard deviations; exp(-72) tails.
constexpr double kWindowSigmas = 12.0;

void require_coefficients(const SignalInputs& s) {
  if (std::abs(std::norm(s.a) + std::norm(s.b) - 1.0) > kCoefficientTol) {
    throw Error(Errc::BadCoefficients, "|a|^2 + |b|^2 must equal 1");
  }
}

double diagonal_part(const SignalInputs& s) {
  return std::norm(s.a) * s.a_pp + std::norm(s.b) * s.a_mm;
}

double trapezoid_step(double lo, double hi, int intervals) {
  return (hi - lo) / static_cast<double>(intervals);
}

// One quadrature level of the normalized chi+/chi- overlap with `n` intervals per axis.
double oracle_level(const GaussianScenario& sc, VarianceConvention conv, int n) {
  const double var_phi = density_variance(sc.sigma2, conv);
  const double sd_phi = std::sqrt(var_phi);
  // chi0(u) ~ exp(-u^2 / chi_den); its amplitude profile has width sqrt(chi_den / 2).
  const double chi_den = conv == VarianceConvention::Density ? 4.0 * sc.beta2 : 2.0 * sc.beta2;
  const double reach_chi = kWindowSigmas * std::sqrt(chi_den / 2.0);
  const double c = sc.coupling_product();

  const double x_lo = std::min(sc.m_plus, sc.m_minus) - kWindowSigmas * sd_phi;
  const double x_hi = std::max(sc.m_plus, sc.m_minus) + kWindowSigmas * sd_phi;
  const double y_lo = std::min(c * x_lo, c * x_hi) - reach_chi;
  const double y_hi = std::max(c * x_lo, c * x_hi) + reach_chi;

  auto chi_branch = [&](double mean, double y) {
    double lo = mean - kWindowSigmas * sd_phi;
    double hi = mean + kWindowSigmas * sd_phi;
    if (c != 0.0) {
      const double a = (y - reach_chi) / c;
      const double b = (y + reach_chi) / c;
      lo = std::max(lo, std::min(a, b));
      hi = std::min(hi, std::max(a, b));
    }
    if (!(hi > lo)) return 0.0;
    const double h = trapezoid_step(lo, hi, n);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double x = lo + h * k;
      const double u = y - c * x;
      const double dx = x - mean;
      const double f = std::exp(-dx * dx / (2.0 * var_phi) - u * u / chi_den);
      s += (k == 0 || k == n) ? 0.5 * f : f;
    }
    return s * h;
  };

  const double hy = trapezoid_step(y_lo, y_hi, n);
  double pm = 0.0;
  double pp = 0.0;
  double mm = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double y = y_lo + hy * k;
    const double cp = chi_branch(sc.m_plus, y);
    const double cm = chi_branch(sc.m_minus, y);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    pm += w * cp * cm;
    pp += w * cp * cp;
    mm += w * cm * cm;
  }
  if (!(pp > 0.0) || !(mm > 0.0)) throw Error(Errc::NoConvergence, "oracle branch vanished");
  return pm / std::sqrt(pp * mm);
}

}  // namespace

double expectation_with_interaction(const SignalInputs& s) {
  require_coefficients(s);
  return diagonal_part(s) + 2.0 * (std::conj(s.a) * s.b * s.gamma2 * s.gamma3 * s.alpha).real();
}

double expectation_without_interaction(const SignalInputs& s) {
  SignalInputs t = s;
  t.gamma3 = 1.0;
  return expectation_with_interaction(t);
}

double delta(const SignalInputs& s) {
  return expectation_without_interaction(s) - expectation_with_interaction(s);
}

double GaussianScenario::M() const {
  const double dm = m_plus - m_minus;
  return dm * dm / (2.0 * K());
}

GaussianScenario GaussianScenario::with_G(double G) const {
  GaussianScenario out = *this;
  if (!(out.duration > 0.0)) out.duration = 1.0;
  out.g23 = std::sqrt(2.0 * std::max(G, 0.0)) / out.duration;
  return out;
}

void validate_scenario(const GaussianScenario& sc) {
  if (!(sc.sigma2 > 0.0) || !(sc.beta2 > 0.0) || !(sc.duration >= 0.0) ||
      !std::isfinite(sc.m_plus) || !std::isfinite(sc.m_minus) || !std::isfinite(sc.g23)) {
    std::ostringstream os;
    os << "scenario needs sigma2 > 0, beta2 > 0, T >= 0 (got sigma2=" << sc.sigma2
       << ", beta2=" << sc.beta2 << ", T=" << sc.duration << ")";
    throw Error(Errc::InvalidScenario, os.str());
  }
}

double gamma3_closed_form(const GaussianScenario& sc) {
  validate_scenario(sc);
  return std::exp(-sc.M() * sc.G()) / std::sqrt(sc.beta2);
}

double gamma3_oracle(const GaussianScenario& sc, VarianceConvention conv,
                     const OracleOptions& opts) {
  validate_scenario(sc);
  int n = opts.min_nodes;
  double prev = oracle_level(sc, conv, n);
  while (true) {
    n *= 2;
    if (n > opts.max_nodes) {
      throw Error(Errc::NoConvergence, "gamma3_oracle did not converge within node budget");
    }
    const double cur = oracle_level(sc, conv, n);
    if (std::abs(cur - prev) < opts.tolerance) return std::min(cur, 1.0);
    prev = cur;
  }
}

double gamma3_oracle_asymptote(const GaussianScenario& sc, VarianceConvention conv) {
  return gamma3_oracle(sc.with_G(kAsymptoteG), conv);
}

double invert_delta_to_gamma3(double delta_value, double a, double b, double gamma2,
                              double alpha) {
  const double denom = 2.0 * a * b * gamma2 * alpha;
  if (!(std::abs(denom) > kDegenerateTol)) {
    throw Error(Errc::DegenerateChannel,
                "2 a b gamma2 alpha vanishes; delta carries no information about gamma3");
  }
  return 1.0 - delta_value / denom;
}

double invert_gamma3_to_G(double target, const GaussianScenario& sc_template,
                          InversionMode mode, VarianceConvention conv) {
  validate_scenario(sc_template);
  auto forward = [&](double G) {
    return mode == InversionMode::ClosedForm ? gamma3_closed_form(sc_template.with_G(G))
                                             : gamma3_oracle(sc_template.with_G(G), conv);
  };
  const double top = forward(0.0);
  double floor_value = 0.0;
  if (mode == InversionMode::ClosedForm) {
    const double dm = sc_template.m_plus - sc_template.m_minus;
    floor_value = std::exp(-dm * dm / (2.0 * sc_template.sigma2)) / std::sqrt(sc_template.beta2);
  } else {
    floor_value = gamma3_oracle_asymptote(sc_template, conv);
  }
  if (!(target <= top + 1e-12) || !(target > floor_value)) {
    std::ostringstream os;
    os << "gamma3 target " << target << " outside attainable range (" << floor_value << ", "
       << top << "]";
    throw Error(Errc::OutOfRange, os.str());
  }

  double lo = 0.0;
  double hi = 1.0;
  while (forward(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxBracketG) throw Error(Errc::NoConvergence, "could not bracket G");
  }
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (forward(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  const double G = 0.5 * (lo + hi);
  if (std::abs(forward(G) - target) > kInversionTol) {
    throw Error(Errc::NoConvergence, "bisection residual above tolerance");
  }
  return G;
}

}  // namespace iit
