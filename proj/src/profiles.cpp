#include "twistshock/profiles.hpp"

#include "twistshock/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace twistshock {

std::string_view to_string(Family f) { return f == Family::Forward ? "forward" : "backward"; }

std::string_view to_string(CheckPath p) { return p == CheckPath::Analytic ? "analytic" : "sampled"; }

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

double Profile::r0(double x) const { return -primitive_L(w0_prime(x)); }

std::optional<int> Profile::r0_prime_tail_sign(double, Family) const { return std::nullopt; }

std::pair<double, double> Profile::data_range() const {
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

// ---------------------------------------------------------------------------
// Kink

KinkProfile::KinkProfile(double kappa, double zeta) : kappa_(kappa), zeta_(zeta) {
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw std::invalid_argument("kink amplitude kappa must be > 0, got " + std::to_string(kappa));
  }
  if (!std::isfinite(zeta) || zeta <= 0.0) {
    throw std::invalid_argument("kink width zeta must be > 0, got " + std::to_string(zeta));
  }
}

double KinkProfile::xi(double x) const {
  return 2.0 * kappa_ * zeta_ / (std::numbers::pi * (x * x + zeta_ * zeta_));
}

double KinkProfile::w0(double x) const {
  return -(2.0 * kappa_ / std::numbers::pi) * std::atan(x / zeta_);
}

double KinkProfile::w0_prime(double x) const { return -xi(x); }

double KinkProfile::r0(double x) const { return primitive_L(xi(x)); }

double KinkProfile::r0_prime(double x) const {
  const double s = x * x + zeta_ * zeta_;
  const double xi_prime = -(2.0 * kappa_ * zeta_ / std::numbers::pi) * 2.0 * x / (s * s);
  return wave_speed(xi(x)) * xi_prime;
}

double KinkProfile::sup_norm_r0() const { return r0(0.0); }

std::optional<int> KinkProfile::r0_prime_tail_sign(double from, Family family) const {
  // r0' < 0 on (0, inf), > 0 on (-inf, 0), zero at the origin.
  if (family == Family::Forward) return from > 0.0 ? -1 : 0;
  return from < 0.0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Closed-form callables

FunctionProfile::FunctionProfile(Callables fns, double w0_prime_minus_inf,
                                 double w0_prime_plus_inf, bool even_r0)
    : fns_(std::move(fns)), even_(even_r0) {
  if (!fns_.w0 || !fns_.w0_prime || !fns_.w0_second) {
    throw std::invalid_argument("FunctionProfile: all three callables are required");
  }
  r0_minus_ = -primitive_L(w0_prime_minus_inf);
  r0_plus_ = -primitive_L(w0_prime_plus_inf);
  sup_norm_ = scan_sup_norm_r0(*this);
}

double FunctionProfile::r0_prime(double x) const {
  return -wave_speed(fns_.w0_prime(x)) * fns_.w0_second(x);
}

// ---------------------------------------------------------------------------
// Tabulated

TabulatedProfile::TabulatedProfile(std::vector<double> x, std::vector<double> w0,
                                   std::vector<double> w0_prime, double r0_minus_inf,
                                   double r0_plus_inf)
    : x_(std::move(x)), w_(std::move(w0)), wp_(std::move(w0_prime)),
      r0_minus_(r0_minus_inf), r0_plus_(r0_plus_inf) {
  if (x_.size() < 2 || w_.size() != x_.size() || wp_.size() != x_.size()) {
    throw std::invalid_argument("TabulatedProfile: need >= 2 samples of equal length");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw std::invalid_argument("TabulatedProfile: abscissae must be strictly increasing");
    }
  }
  if (!std::isfinite(r0_minus_) || !std::isfinite(r0_plus_)) {
    throw std::invalid_argument("TabulatedProfile: limits of r0 must be finite");
  }
  // Piecewise-linear w0' makes |r0| maximal at a sample; scan them directly.
  sup_norm_ = 0.0;
  for (double s : wp_) sup_norm_ = std::max(sup_norm_, std::abs(primitive_L(s)));
}

std::size_t TabulatedProfile::cell(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return 0;
  const auto i = static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double TabulatedProfile::w0(double x) const {
  if (x <= x_.front()) return w_.front() + wp_.front() * (x - x_.front());
  if (x >= x_.back()) return w_.back() + wp_.back() * (x - x_.back());
  const std::size_t i = cell(x);
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * w_[i] + h10 * h * wp_[i] + h01 * w_[i + 1] + h11 * h * wp_[i + 1];
}

double TabulatedProfile::w0_prime(double x) const {
  if (x <= x_.front()) return wp_.front();
  if (x >= x_.back()) return wp_.back();
  const std::size_t i = cell(x);
  const double s = (x - x_[i]) / (x_[i + 1] - x_[i]);
  return (1 - s) * wp_[i] + s * wp_[i + 1];
}

double TabulatedProfile::r0_prime(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = cell(x);
  const double w0_second = (wp_[i + 1] - wp_[i]) / (x_[i + 1] - x_[i]);
  return -wave_speed(w0_prime(x)) * w0_second;
}

// ---------------------------------------------------------------------------

double golden_section_max(const std::function<double(double)>& g, double a, double b,
                          double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (std::abs(b - a) > tol) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

double scan_sup_norm_r0(const Profile& p, const SupNormScan& scan) {
  if (scan.points < 3 || !(scan.hi > scan.lo)) {
    throw std::invalid_argument("scan_sup_norm_r0: need hi > lo and >= 3 points");
  }
  const double h = (scan.hi - scan.lo) / (scan.points - 1);
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < scan.points; ++i) {
    const double v = std::abs(p.r0(scan.lo + i * h));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = scan.lo + std::max(best - 1, 0) * h;
  const double b = scan.lo + std::min(best + 1, scan.points - 1) * h;
  const double xm = golden_section_max([&](double x) { return std::abs(p.r0(x)); }, a, b,
                                       1e-12 * std::max(1.0, std::abs(a) + std::abs(b)));
  const double limits = std::max(std::abs(p.r0_limit_plus()), std::abs(p.r0_limit_minus()));
  return std::max({best_val, std::abs(p.r0(xm)), limits});
}

double delta_bound(const Profile& p) {
  const double m = p.sup_norm_r0();
  if (!std::isfinite(m) || m <= 0.0) {
    throw std::invalid_argument("delta_bound: sup norm of r0 must be finite and > 0");
  }
  return k_of_eta(2.0 * m);
}

Admissibility check_admissible(const Profile& p, double origin, Family family,
                               const TailSampling& sampling) {
  const bool fwd = family == Family::Forward;
  const double r_inf = fwd ? p.r0_limit_plus() : p.r0_limit_minus();
  const int want = fwd ? -1 : 1;
  const double ra = p.r0(origin);
  const double rpa = p.r0_prime(origin);

  Admissibility out;
  const auto tail = p.r0_prime_tail_sign(origin, family);
  out.path = tail ? CheckPath::Analytic : CheckPath::Sampled;

  if (sgn(rpa * (ra + r_inf)) != want) return out;
  if (!(sgn(ra * r_inf) == 1 || r_inf == 0.0)) return out;

  if (tail) {
    if (*tail * sgn(ra) != want) return out;
  } else {
    const int n = std::max(sampling.points, 2);
    const auto [lo, hi] = p.data_range();
    const double room = fwd ? hi - origin : origin - lo;
    const double step = std::clamp(std::min(sampling.span, room), 0.0, sampling.span) / (n - 1);
    double x = origin;
    for (int i = 0; i < n; ++i) {
      x = fwd ? origin + i * step : origin - i * step;
      if (sgn(p.r0_prime(x) * ra) != want) return out;
    }
    // Beyond the sampled window r0 must still approach its limit from the
    // side the tail monotonicity implies.
    if (sgn((p.r0(x) - r_inf) * ra) != 1) return out;
  }
  out.admissible = true;
  return out;
}

bool admissible_forward(const Profile& p, double alpha) {
  return check_admissible(p, alpha, Family::Forward).admissible;
}

bool admissible_backward(const Profile& p, double beta) {
  return check_admissible(p, beta, Family::Backward).admissible;
}

}  // namespace twistshock
