#include "twistshock/characteristics.hpp"

#include "twistshock/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace twistshock {

namespace {

// Linear interpolation of grid quantities at an off-grid point.
struct Locator {
  const Grid1D& g;
  double dx;
  int n;

  explicit Locator(const Grid1D& grid) : g(grid), dx(grid.dx()), n(grid.n) {}

  bool inside(double x) const { return x >= g.x_min + 2 * dx && x <= g.x_max - 2 * dx; }

  // Cell index j with x in [x_j, x_{j+1}] and weight s in [0, 1].
  std::pair<int, double> cell(double x) const {
    const double u = (x - g.x_min) / dx;
    int j = static_cast<int>(std::floor(u));
    j = std::clamp(j, 1, n - 3);
    return {j, u - j};
  }

  double value(const std::vector<double>& f, double x) const {
    const auto [j, s] = cell(x);
    return (1 - s) * f[j] + s * f[j + 1];
  }

  // Centred difference at the two bracketing nodes, interpolated.
  double gradient(const std::vector<double>& f, double x) const {
    const auto [j, s] = cell(x);
    const double gj = (f[j + 1] - f[j - 1]) / (2 * dx);
    const double gj1 = (f[j + 2] - f[j]) / (2 * dx);
    return (1 - s) * gj + s * gj1;
  }
};

double eta_at(const Frame& fr, const Locator& loc, double x) {
  const auto [j, s] = loc.cell(x);
  const double e0 = fr.r[j] - fr.l[j];
  const double e1 = fr.r[j + 1] - fr.l[j + 1];
  return (1 - s) * e0 + s * e1;
}

struct Local {
  double eta;
  double speed;  // signed
  double own;    // weighted derivative of the carried field
  double other;  // weighted derivative of the opposite field
};

Local sample(const History& h, const Locator& loc, std::size_t frame, double x, Family fam) {
  const Frame& fr = h.frames[frame];
  const double eta = eta_at(fr, loc, x);
  const double k = k_of_eta(eta);
  const double weight = amplification(h.damping, fr.t) * std::sqrt(k);
  const double pr = weight * loc.gradient(fr.r, x);
  const double ql = weight * loc.gradient(fr.l, x);
  const bool fwd = fam == Family::Forward;
  return Local{eta, fwd ? k : -k, fwd ? pr : ql, fwd ? ql : pr};
}

double carried_rate(const History& h, double t, const Local& s, double carried) {
  return -0.5 * h.damping.lambda * s.other -
         f_of_eta(s.eta) * carried * carried / amplification(h.damping, t);
}

void require_history(const History& h) {
  if (h.frames.size() < 3) throw std::invalid_argument("trace: history needs >= 3 frames");
}

}  // namespace

CharTrace trace(const History& h, Family family, double origin, double t_end) {
  require_history(h);
  const Locator loc(h.grid);
  if (!loc.inside(origin)) throw std::invalid_argument("trace: origin outside the grid");
  if (!(t_end >= 0.0)) throw std::invalid_argument("trace: t_end must be >= 0");

  CharTrace tr;
  tr.family = family;
  tr.origin = origin;
  double x = origin;
  Local s0 = sample(h, loc, 0, x, family);
  double carried = s0.own;
  tr.samples.push_back(TraceSample{h.frames[0].t, x, s0.eta, s0.own, carried, s0.other, 1.0, 0.0});

  const double dt = h.dt;
  for (std::size_t f = 0; f + 2 < h.frames.size(); f += 2) {
    const double t0 = h.frames[f].t;
    if (t0 >= t_end - 1e-12) break;
    const double H = h.frames[f + 2].t - t0;
    const Local a = sample(h, loc, f, x, family);
    const double k1x = a.speed, k1p = carried_rate(h, t0, a, carried);
    const double xb = x + 0.5 * H * k1x;
    if (!loc.inside(xb)) { tr.exit_time = t0; break; }
    const Local b = sample(h, loc, f + 1, xb, family);
    const double pb = carried + 0.5 * H * k1p;
    const double k2x = b.speed, k2p = carried_rate(h, t0 + dt, b, pb);
    const double xc = x + 0.5 * H * k2x;
    if (!loc.inside(xc)) { tr.exit_time = t0; break; }
    const Local c = sample(h, loc, f + 1, xc, family);
    const double pc = carried + 0.5 * H * k2p;
    const double k3x = c.speed, k3p = carried_rate(h, t0 + dt, c, pc);
    const double xd = x + H * k3x;
    if (!loc.inside(xd)) { tr.exit_time = t0; break; }
    const Local e = sample(h, loc, f + 2, xd, family);
    const double pd = carried + H * k3p;
    const double k4x = e.speed, k4p = carried_rate(h, t0 + H, e, pd);
    x += H / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    carried += H / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if (!loc.inside(x)) { tr.exit_time = t0 + H; break; }
    const Local now = sample(h, loc, f + 2, x, family);
    tr.samples.push_back(
        TraceSample{h.frames[f + 2].t, x, now.eta, now.own, carried, now.other, 1.0, 0.0});
  }
  return tr;
}

double backward_foot(const History& h, std::size_t frame, double x) {
  require_history(h);
  if (frame % 2 != 0 || frame >= h.frames.size()) {
    throw std::invalid_argument("backward_foot: frame must be even and recorded");
  }
  const Locator loc(h.grid);
  const auto speed = [&](std::size_t f, double y) {
    return -k_of_eta(eta_at(h.frames[f], loc, std::clamp(y, h.grid.x_min + 2 * loc.dx,
                                                         h.grid.x_max - 2 * loc.dx)));
  };
  // Integrate dx/dt = -k backwards: dx/d(-t) = +k.
  for (std::size_t f = frame; f >= 2; f -= 2) {
    const double H = h.frames[f].t - h.frames[f - 2].t;
    const double k1 = speed(f, x);
    const double k2 = speed(f - 1, x - 0.5 * H * k1);
    const double k3 = speed(f - 1, x - 0.5 * H * k2);
    const double k4 = speed(f - 2, x - H * k3);
    x -= H / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!loc.inside(x)) throw std::runtime_error("backward characteristic left the grid");
  }
  return x;
}

double beta_of_alpha(const History& h, double t, double alpha) {
  require_history(h);
  if (!(t >= 0.0)) throw std::invalid_argument("beta_of_alpha: t must be >= 0");
  std::size_t frame = static_cast<std::size_t>(std::llround(t / h.dt));
  frame -= frame % 2;
  if (frame >= h.frames.size()) throw std::invalid_argument("beta_of_alpha: t beyond the history");
  const CharTrace tr = trace(h, Family::Forward, alpha, h.frames[frame].t);
  if (tr.samples.size() != frame / 2 + 1) {
    throw std::runtime_error("beta_of_alpha: forward curve left the grid");
  }
  return backward_foot(h, frame, tr.samples.back().x);
}

std::vector<std::pair<double, double>> compression_ratio(CharTrace& tr, const Profile& p,
                                                         const Damping& d) {
  if (tr.samples.empty()) return {};
  const double k0 = k_of_eta(2.0 * p.r0(tr.origin));
  std::vector<std::pair<double, double>> out;
  out.reserve(tr.samples.size());
  double integral = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    auto& s = tr.samples[i];
    const double g = f_of_eta(s.eta) * s.pq / amplification(d, s.t);
    if (i > 0) integral += 0.5 * (s.t - tr.samples[i - 1].t) * (g + prev);
    prev = g;
    s.c = std::sqrt(k_of_eta(s.eta) / k0) * std::exp(integral);
    out.emplace_back(s.t, s.c);
  }
  return out;
}

PhiBound phi_lower_bound(CharTrace& tr, const Damping& d) {
  if (tr.family != Family::Forward) throw std::invalid_argument("phi bound needs a forward trace");
  if (tr.samples.empty()) return {};
  const double p0 = tr.samples.front().pq;
  if (!(p0 < 0.0)) throw std::invalid_argument("phi bound needs p(0, alpha) < 0");
  const double a = std::abs(p0);
  PhiBound out;
  double integral = 0.0;
  double prev = 0.0;
  double prev_den = 1.0;
  for (auto& s : tr.samples) s.phi = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    auto& s = tr.samples[i];
    const double g = f_of_eta(s.eta) / amplification(d, s.t);
    if (i > 0) integral += 0.5 * (s.t - tr.samples[i - 1].t) * (g + prev);
    prev = g;
    const double den = 1.0 - a * integral;
    if (den <= 0.0) {
      const double t0 = tr.samples[i - 1].t;
      out.blowup_time = t0 + (s.t - t0) * prev_den / (prev_den - den);
      out.denominator_at_end = den;
      return out;
    }
    prev_den = den;
    s.phi = -a / den;
    out.values.emplace_back(s.t, s.phi);
  }
  out.denominator_at_end = prev_den;
  return out;
}

EnvelopeReport check_envelopes(const History& h, const CharTrace& tr, const Profile& p,
                               const Damping& d, double t_cut) {
  if (tr.family != Family::Forward) throw std::invalid_argument("envelope checks need a forward trace");
  EnvelopeReport rep;
  rep.t_cut = t_cut;
  const double alpha = tr.origin;
  const double ra = p.r0(alpha);
  const double rpa = p.r0_prime(alpha);
  const double delta = delta_bound(p);
  const double dx = h.grid.dx();
  // Discretisation allowance: linear interpolation in x and the spatial
  // error of the field are both O(dx^2).
  const double tol = 10.0 * dx * dx;
  const int sgn0 = sgn(2.0 * ra);

  auto note = [](CheckResult& c, double margin, double allowance) {
    ++c.checked;
    if (c.checked == 1 || margin < c.worst_margin) c.worst_margin = margin;
    if (margin < -allowance) {
      ++c.violations;
      c.pass = false;
    }
  };

  CriticalTimeEstimator est(p, d);
  double q_integral = 0.0;
  double prev_beta = alpha;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    if (s.t > t_cut + 1e-12) break;
    if (i > 0) q_integral += 0.5 * (s.t - tr.samples[i - 1].t) * (s.cross + tr.samples[i - 1].cross);
    const double beta = i == 0 ? alpha : backward_foot(h, 2 * i, s.x);
    rep.beta.emplace_back(s.t, beta);

    const double ia = 1.0 / amplification(d, s.t);
    const double rb = p.r0(beta);
    const double eta_l = ia * (rb + ra) + 2.0 * rb * (1.0 - ia);
    const double eta_u = ia * (rb + ra) + 2.0 * ra * (1.0 - ia);
    const double lo = std::min(eta_l, eta_u), hi = std::max(eta_l, eta_u);
    note(rep.envelope, std::min(s.eta - lo, hi - s.eta), tol);
    note(rep.sign, sgn0 * s.eta, 0.0);
    note(rep.beta_confined, std::min(beta - alpha, alpha + 2.0 * delta * s.t - beta), tol);
    if (i > 0) note(rep.beta_monotone, beta - prev_beta, 0.0);
    prev_beta = beta;
    if (i > 0 && est.selection_residual(s.t, alpha, Family::Forward) >= 0.0) {
      // Required: sgn(r0'(alpha) int q) = -1.
      note(rep.integral_q, -rpa * q_integral, 0.0);
      if (-rpa * q_integral == 0.0) {
        rep.integral_q.pass = false;
        ++rep.integral_q.violations;
      }
    }
  }
  // Strict monotonicity: a zero increment fails as well.
  if (rep.beta_monotone.checked > 0 && !(rep.beta_monotone.worst_margin > 0.0)) {
    rep.beta_monotone.pass = false;
  }
  return rep;
}

}  // namespace twistshock
