#include "twistshock/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace twistshock {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + ": non-finite argument");
  }
}

// L restricted to u >= 0; the public entry points apply odd symmetry so that
// L(-u) == -L(u) holds bit for bit.
double primitive_L_nonneg(double u) {
  return 0.5 * (u * std::hypot(1.0, u) + std::asinh(u));
}

double inverse_L_nonneg(double y) {
  if (y == 0.0) return 0.0;
  // Q >= 1 gives L(u) >= u, and L(u) >= u^2/2, so the root lies in [0, hi].
  double lo = 0.0;
  double hi = std::min(y, std::sqrt(2.0 * y));
  double u = y <= 1.0 ? std::sinh(y) : std::sqrt(2.0 * y);
  u = std::clamp(u, lo, hi);

  const double tol = 1e-12 * std::max(1.0, y);
  for (int it = 0; it < 200; ++it) {
    const double res = primitive_L_nonneg(u) - y;
    if (res > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    double next = u - res / std::hypot(1.0, u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - u);
    u = next;
    if (step <= 1e-15 * std::max(1.0, u) || hi - lo <= 1e-15 * std::max(1.0, u)) {
      if (std::abs(primitive_L_nonneg(u) - y) <= tol) return u;
    }
  }
  if (std::abs(primitive_L_nonneg(u) - y) <= tol) return u;
  throw std::runtime_error("inverse_L: Newton iteration did not converge for y=" +
                           std::to_string(y));
}

}  // namespace

Damping::Damping(double lam) : lambda(lam) {
  if (!std::isfinite(lam) || lam < 0.0) {
    throw std::invalid_argument("damping lambda must be finite and >= 0, got " +
                                std::to_string(lam));
  }
}

double wave_speed(double xi) {
  require_finite(xi, "wave_speed");
  return std::hypot(1.0, xi);
}

double primitive_L(double u) {
  require_finite(u, "primitive_L");
  const double v = primitive_L_nonneg(std::abs(u));
  return u < 0.0 ? -v : v;
}

double inverse_L(double y) {
  require_finite(y, "inverse_L");
  const double u = inverse_L_nonneg(std::abs(y));
  return y < 0.0 ? -u : u;
}

double u1_of_eta(double eta) { return inverse_L(-0.5 * eta); }

double k_of_eta(double eta) { return std::hypot(1.0, u1_of_eta(eta)); }

double f_of_eta(double eta) {
  const double u = u1_of_eta(eta);
  return -0.5 * u / std::pow(1.0 + u * u, 1.25);
}

double selection_weight_H(double eta) {
  const double u1 = u1_of_eta(eta);
  if (u1 == 0.0) return 0.0;
  auto integrand = [](double u) { return std::sqrt(std::hypot(1.0, u)); };
  double err = 0.0;  // relative estimate
  double l1 = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, std::abs(u1), 20, 1e-13, &err, &l1);
  if (!std::isfinite(val) || err * l1 > 1e-10) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "selection_weight_H: quadrature failed at eta=%.9g", eta);
    throw std::runtime_error(msg);
  }
  // H = -2 int_0^{u1} sqrt(Q); sign follows -u1, i.e. the sign of eta.
  return u1 < 0.0 ? 2.0 * val : -2.0 * val;
}

FExtremum f_extremum() {
  const double u0 = std::sqrt(2.0 / 3.0);
  return {2.0 * primitive_L_nonneg(u0), 0.5 * u0 / std::pow(1.0 + u0 * u0, 1.25)};
}

double amplification(const Damping& d, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("amplification: time must be >= 0, got " + std::to_string(t));
  }
  return std::exp(0.5 * d.lambda * t);
}

Nondimensional nondimensionalize(const PhysicalParams& p) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument(std::string("nondimensionalize: ") + name +
                                  " must be positive, got " + std::to_string(v));
    }
  };
  check(p.a, "a");
  check(p.gamma1, "gamma1");
  check(p.sigma, "sigma");
  check(p.K22, "K22");
  const double tau = std::sqrt(3.0) * p.a * std::sqrt(p.sigma / p.K22);
  const double lam = p.a * p.gamma1 * std::sqrt(3.0 / (p.sigma * p.K22));
  return {Damping(lam), tau};
}

}  // namespace twistshock
