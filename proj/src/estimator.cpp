#include "twistshock/estimator.hpp"

#include "twistshock/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twistshock {

std::string_view to_string(TcStatus s) {
  switch (s) {
    case TcStatus::RootSelected: return "root_selected";
    case TcStatus::RootRejected: return "root_rejected";
    case TcStatus::NoRoot: return "no_root";
  }
  return "?";
}

std::string_view to_string(NoRootReason r) {
  switch (r) {
    case NoRootReason::None: return "none";
    case NoRootReason::ResidualPositive: return "residual_positive";
    case NoRootReason::RangeTooSmall: return "range_too_small";
  }
  return "?";
}

CriticalTimeEstimator::CriticalTimeEstimator(const Profile& profile, Damping damping)
    : profile_(profile), damping_(damping), delta_(delta_bound(profile)) {}

CriticalTimeEstimator::OriginData CriticalTimeEstimator::origin_data(double origin) const {
  const double r = profile_.r0(origin);
  return {origin, r, profile_.r0_prime(origin), k_of_eta(2.0 * r), std::abs(f_of_eta(2.0 * r))};
}

void CriticalTimeEstimator::require_admissible(double origin, Family family) const {
  if (!check_admissible(profile_, origin, family).admissible) {
    throw std::invalid_argument("origin " + std::to_string(origin) + " is not admissible for the " +
                                std::string(to_string(family)) + " family");
  }
}

double CriticalTimeEstimator::eta_envelope_unchecked(double t, const OriginData& o,
                                                     Family family) const {
  const double shift = 2.0 * delta_ * t;
  const double rb = profile_.r0(family == Family::Forward ? o.origin + shift : o.origin - shift);
  const double inv_a = std::exp(-0.5 * damping_.lambda * t);
  return inv_a * (rb + o.r0) + 2.0 * rb * (1.0 - inv_a);
}

double CriticalTimeEstimator::residual_unchecked(double t, const OriginData& o,
                                                 Family family) const {
  const double gam = std::min(std::abs(f_of_eta(eta_envelope_unchecked(t, o, family))), o.f0_abs);
  // (2/lambda)(1 - A^{-1}) without cancellation for small lambda t.
  const double weight = -std::expm1(-0.5 * damping_.lambda * t) * 2.0 / damping_.lambda;
  return 1.0 - weight * gam * std::abs(o.r0_prime) * std::sqrt(o.k0);
}

double CriticalTimeEstimator::selection_unchecked(double t, const OriginData& o,
                                                  Family family) const {
  const double half = 0.5 * damping_.lambda * t;
  const double eta = eta_envelope_unchecked(t, o, family);
  return -2.0 * std::expm1(half) / std::sqrt(k_of_eta(eta)) +
         (2.0 - std::exp(-half)) / std::sqrt(o.k0);
}

double CriticalTimeEstimator::eta_envelope(double t, double origin, Family family) const {
  if (!(t >= 0.0)) throw std::invalid_argument("eta_envelope: t must be >= 0");
  require_admissible(origin, family);
  return eta_envelope_unchecked(t, origin_data(origin), family);
}

double CriticalTimeEstimator::gamma(double t, double origin, Family family) const {
  const double eta = eta_envelope(t, origin, family);
  return std::min(std::abs(f_of_eta(eta)), std::abs(f_of_eta(2.0 * profile_.r0(origin))));
}

double CriticalTimeEstimator::critical_residual(double t, double origin, Family family) const {
  if (damping_.lambda <= 0.0) {
    throw std::invalid_argument("critical_residual requires lambda > 0; use inviscid_tc");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("critical_residual: t must be >= 0");
  require_admissible(origin, family);
  return residual_unchecked(t, origin_data(origin), family);
}

double CriticalTimeEstimator::selection_residual(double t, double origin, Family family) const {
  if (!(t >= 0.0)) throw std::invalid_argument("selection_residual: t must be >= 0");
  require_admissible(origin, family);
  return selection_unchecked(t, origin_data(origin), family);
}

CriticalTimeResult CriticalTimeEstimator::solve_unchecked(const OriginData& o, Family family,
                                                          const RootScan& scan) const {
  CriticalTimeResult out;
  out.origin = o.origin;
  out.family = family;

  const double h = scan.t_scan_max / scan.points;
  double t_prev = 0.0;
  double r_prev = 1.0;  // residual at t = 0 is exactly one
  if (scan.keep_path) out.residual_path.push_back({0.0, r_prev});
  for (int i = 1; i <= scan.points; ++i) {
    const double t = i * h;
    const double r = residual_unchecked(t, o, family);
    if (scan.keep_path) out.residual_path.push_back({t, r});
    if (r <= 0.0) {
      double lo = t_prev;
      double hi = t;
      while (hi - lo > scan.t_tol) {
        const double mid = 0.5 * (lo + hi);
        if (residual_unchecked(mid, o, family) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double tc = 0.5 * (lo + hi);
      out.t_c = tc;
      out.selection_residual_at_tc = selection_unchecked(tc, o, family);
      out.status = *out.selection_residual_at_tc >= 0.0 ? TcStatus::RootSelected
                                                        : TcStatus::RootRejected;
      return out;
    }
    if (i == scan.points) {
      out.no_root_reason = r < r_prev ? NoRootReason::RangeTooSmall
                                      : NoRootReason::ResidualPositive;
    }
    t_prev = t;
    r_prev = r;
  }
  out.status = TcStatus::NoRoot;
  return out;
}

CriticalTimeResult CriticalTimeEstimator::solve(double origin, Family family,
                                                const RootScan& scan) const {
  if (damping_.lambda <= 0.0) {
    throw std::invalid_argument("solve requires lambda > 0; use inviscid_tc for lambda = 0");
  }
  if (scan.points < 1 || !(scan.t_scan_max > 0.0)) {
    throw std::invalid_argument("solve: scan range must be positive");
  }
  require_admissible(origin, family);
  return solve_unchecked(origin_data(origin), family, scan);
}

std::optional<double> CriticalTimeEstimator::inviscid_unchecked(const OriginData& o,
                                                                Family family) const {
  const double r_inf =
      family == Family::Forward ? profile_.r0_limit_plus() : profile_.r0_limit_minus();
  const double gam0 = std::min(o.f0_abs, std::abs(f_of_eta(o.r0 + r_inf)));
  const double denom = std::sqrt(o.k0) * std::abs(o.r0_prime) * gam0;
  if (!(denom > 0.0)) return std::nullopt;
  return 1.0 / denom;
}

std::optional<double> CriticalTimeEstimator::inviscid_tc(double origin, Family family) const {
  require_admissible(origin, family);
  return inviscid_unchecked(origin_data(origin), family);
}

FamilyEstimate CriticalTimeEstimator::scan_family(std::span<const double> grid, Family family,
                                                  const EstimateOptions& opts) const {
  FamilyEstimate fam;
  fam.family = family;
  const bool inviscid = damping_.lambda <= 0.0;

  std::vector<double> origins;
  for (double a : grid) {
    if (check_admissible(profile_, a, family).admissible) origins.push_back(a);
  }
  fam.admissible_count = static_cast<int>(origins.size());
  if (origins.empty()) return fam;

  auto solve_one = [&](double a) {
    const OriginData o = origin_data(a);
    if (!inviscid) return solve_unchecked(o, family, opts.scan);
    CriticalTimeResult r;
    r.origin = a;
    r.family = family;
    r.t_c = inviscid_unchecked(o, family);
    r.status = r.t_c ? TcStatus::RootSelected : TcStatus::NoRoot;
    r.no_root_reason = r.t_c ? NoRootReason::None : NoRootReason::ResidualPositive;
    return r;
  };

  fam.per_origin.resize(origins.size());
  parallel_for(origins.size(), opts.threads,
               [&](std::size_t i) { fam.per_origin[i] = solve_one(origins[i]); });

  // Deterministic reduction: strict '<' keeps the smallest index on ties.
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < fam.per_origin.size(); ++i) {
    const auto& r = fam.per_origin[i];
    if (r.t_c && (!best || *r.t_c < *fam.per_origin[*best].t_c)) best = i;
  }
  if (!best) return fam;

  double t_best = *fam.per_origin[*best].t_c;
  double a_best = origins[*best];
  fam.bracket_lo = origins[*best > 0 ? *best - 1 : 0];
  fam.bracket_hi = origins[std::min(*best + 1, origins.size() - 1)];

  if (opts.refine && fam.bracket_hi > fam.bracket_lo) {
    auto neg_tc = [&](double a) {
      if (!check_admissible(profile_, a, family).admissible) return -1e300;
      const auto r = solve_one(a);
      return r.t_c ? -*r.t_c : -1e300;
    };
    const double lo = std::min(fam.bracket_lo, fam.bracket_hi);
    const double hi = std::max(fam.bracket_lo, fam.bracket_hi);
    const double a_ref = golden_section_max(neg_tc, lo, hi, 1e-7 * std::max(1.0, std::abs(hi)));
    const double t_ref = -neg_tc(a_ref);
    if (t_ref < t_best) {
      t_best = t_ref;
      a_best = a_ref;
    }
  }

  fam.t_hat_c = t_best;
  fam.origin_star = a_best;
  if (inviscid) {
    fam.accepted = true;
  } else {
    const double s = selection_unchecked(t_best, origin_data(a_best), family);
    fam.selection_residual = s;
    fam.accepted = s >= 0.0;
  }
  return fam;
}

LambdaEstimate CriticalTimeEstimator::estimate(std::span<const double> alpha_grid,
                                               const EstimateOptions& opts) const {
  if (alpha_grid.empty()) throw std::invalid_argument("estimate: alpha grid is empty");
  LambdaEstimate out;
  out.lambda = damping_.lambda;
  out.forward = scan_family(alpha_grid, Family::Forward, opts);

  const FamilyEstimate* chosen = &out.forward;
  if (profile_.r0_is_even()) {
    out.note = "backward family resolved by symmetry";
  } else {
    std::vector<double> bgrid = opts.backward_grid;
    if (bgrid.empty()) {
      bgrid.reserve(alpha_grid.size());
      for (double a : alpha_grid) bgrid.push_back(-a);
    }
    out.backward = scan_family(bgrid, Family::Backward, opts);
    const FamilyEstimate& b = *out.backward;
    const FamilyEstimate& f = out.forward;
    // Least accepted time wins; with none accepted report the smaller root.
    if (b.accepted && (!f.accepted || b.t_hat_c < f.t_hat_c)) {
      chosen = &b;
    } else if (!b.accepted && !f.accepted && b.t_hat_c < f.t_hat_c) {
      chosen = &b;
    }
  }

  out.family = chosen->family;
  out.t_hat_c = chosen->t_hat_c;
  out.alpha_star = chosen->origin_star;
  out.selection_residual = chosen->selection_residual;
  out.accepted = chosen->accepted;
  out.t_c_final = out.accepted ? out.t_hat_c : std::numeric_limits<double>::infinity();

  const int admissible =
      out.forward.admissible_count + (out.backward ? out.backward->admissible_count : 0);
  if (admissible == 0) {
    out.note = "no admissible origin: the shock criterion does not apply";
  } else if (!chosen->origin_star) {
    if (!out.note.empty()) out.note += "; ";
    out.note += "no root of the critical-time equation on the scan range";
  }
  return out;
}

// ---------------------------------------------------------------------------

double eta_L_plus(const Profile& p, const Damping& d, double t, double alpha) {
  return CriticalTimeEstimator(p, d).eta_envelope(t, alpha, Family::Forward);
}

double gamma_plus(const Profile& p, const Damping& d, double t, double alpha) {
  return CriticalTimeEstimator(p, d).gamma(t, alpha, Family::Forward);
}

double critical_residual(const Profile& p, const Damping& d, double t, double alpha) {
  return CriticalTimeEstimator(p, d).critical_residual(t, alpha, Family::Forward);
}

double selection_residual(const Profile& p, const Damping& d, double t, double origin,
                          Family family) {
  return CriticalTimeEstimator(p, d).selection_residual(t, origin, family);
}

CriticalTimeResult solve_tc_for_alpha(const Profile& p, const Damping& d, double alpha,
                                      double t_scan_max) {
  RootScan scan;
  scan.t_scan_max = t_scan_max;
  return CriticalTimeEstimator(p, d).solve(alpha, Family::Forward, scan);
}

std::optional<double> inviscid_tc(const Profile& p, double alpha) {
  return CriticalTimeEstimator(p, Damping(0.0)).inviscid_tc(alpha, Family::Forward);
}

LambdaEstimate critical_time_estimate(const Profile& p, const Damping& d,
                                      std::span<const double> alpha_grid, double t_scan_max) {
  EstimateOptions opts;
  opts.scan.t_scan_max = t_scan_max;
  return CriticalTimeEstimator(p, d).estimate(alpha_grid, opts);
}

std::vector<double> make_origin_grid(double alpha_min, double alpha_max, int points) {
  if (points < 1 || !(alpha_max >= alpha_min)) {
    throw std::invalid_argument("origin grid: need points >= 1 and alpha_max >= alpha_min");
  }
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = alpha_min;
    return g;
  }
  const bool log_spaced = alpha_min > 0.0;
  for (int i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    g[static_cast<std::size_t>(i)] =
        log_spaced ? alpha_min * std::pow(alpha_max / alpha_min, s)
                   : alpha_min + s * (alpha_max - alpha_min);
  }
  return g;
}

std::vector<double> default_alpha_grid(const Profile& p, int points, double alpha_min,
                                       double alpha_max) {
  if (!(alpha_min > 0.0)) throw std::invalid_argument("default_alpha_grid: alpha_min must be > 0");
  if (alpha_max <= 0.0) {
    // March outward until |r0' r0| has fallen below 1e-6 of the running max.
    double peak = 0.0;
    double a = alpha_min;
    for (int i = 0; i < 2000; ++i, a *= 1.02) {
      const double v = std::abs(p.r0_prime(a) * p.r0(a));
      peak = std::max(peak, v);
      if (peak > 0.0 && v < 1e-6 * peak) break;
    }
    alpha_max = std::max(a, alpha_min * 10.0);
  }
  return make_origin_grid(alpha_min, alpha_max, points);
}

}  // namespace twistshock
