#include "twistshock/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace twistshock {

// ---------------------------------------------------------------------------
// Grid

Grid1D Grid1D::make(double x_min, double x_max, int n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw std::invalid_argument("grid: need finite x_max > x_min");
  }
  if (n < 16) throw std::invalid_argument("grid: need n >= 16, got " + std::to_string(n));
  return Grid1D{x_min, x_max, n};
}

Grid1D Grid1D::symmetric(double half_width, double dx) {
  if (!(half_width > 0.0) || !(dx > 0.0)) {
    throw std::invalid_argument("grid: half width and dx must be > 0");
  }
  const int intervals = static_cast<int>(std::llround(2.0 * half_width / dx));
  return make(-half_width, half_width, intervals + 1);
}

double Grid1D::x(int i) const {
  const double h = dx();
  if (2 * i < n - 1) return x_min + i * h;
  if (2 * i == n - 1) return 0.5 * (x_min + x_max);
  return x_max - (n - 1 - i) * h;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = x(i);
  return out;
}

// ---------------------------------------------------------------------------
// Initialisation

namespace {

double far_slope(const Profile& p, bool plus) {
  return inverse_L(-(plus ? p.r0_limit_plus() : p.r0_limit_minus()));
}

// Outermost point of the core on one side: scanning inward from `start`, the
// first x with |w0'(x) - w0'(+-inf)| >= tol.
double core_edge(const Profile& p, bool plus, double tol) {
  const double slope = far_slope(p, plus);
  const auto outside = [&](double x) { return std::abs(p.w0_prime(x) - slope) < tol; };
  double far = plus ? 1.0 : -1.0;
  int guard = 0;
  while (!outside(far) && guard++ < 60) far *= 2.0;
  if (guard >= 60) throw std::invalid_argument("profile slope never settles to its far-field limit");
  // March inward on a fine uniform grid so that bumps in the tail are seen.
  const int samples = 20000;
  for (int i = 0; i <= samples; ++i) {
    const double x = far * (1.0 - static_cast<double>(i) / samples);
    if (!outside(x)) return x;
  }
  return 0.0;
}

// delta, with the flat-profile limit k(0) = 1 allowed.
double speed_bound(const Profile& p) {
  return p.sup_norm_r0() == 0.0 ? 1.0 : delta_bound(p);
}

}  // namespace

double required_half_width(const Profile& p, const CausalityCheck& check) {
  if (!(check.tail_tolerance > 0.0)) throw std::invalid_argument("tail tolerance must be > 0");
  if (!(check.t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  const double edge = std::max(std::abs(core_edge(p, true, check.tail_tolerance)),
                               std::abs(core_edge(p, false, check.tail_tolerance)));
  return edge + speed_bound(p) * check.t_end;
}

SolverState initialize(const Profile& p, const Grid1D& grid, const CausalityCheck& check) {
  if (check.t_end > 0.0) {
    const double need = required_half_width(p, check);
    if (grid.x_max < need || -grid.x_min < need) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "domain [%.6g, %.6g] too small for t_end=%.6g: causality needs |x| >= %.6g",
                    grid.x_min, grid.x_max, check.t_end, need);
      throw CausalityError(buf, need);
    }
  }
  SolverState s;
  s.grid = grid;
  s.w.resize(static_cast<std::size_t>(grid.n));
  s.v.assign(static_cast<std::size_t>(grid.n), 0.0);
  for (int i = 0; i < grid.n; ++i) s.w[static_cast<std::size_t>(i)] = p.w0(grid.x(i));
  return s;
}

SolverState initialize_periodic(const Grid1D& grid, std::vector<double> w, std::vector<double> v,
                                double jump) {
  if (w.size() != static_cast<std::size_t>(grid.n) || v.size() != w.size()) {
    throw std::invalid_argument("periodic state: arrays must have n entries");
  }
  SolverState s;
  s.grid = grid;
  s.w = std::move(w);
  s.v = std::move(v);
  s.boundary = Boundary::Periodic;
  s.periodic_jump = jump;
  return s;
}

double stable_dt(double dx, double delta, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  if (!(dx > 0.0) || !(delta > 0.0)) throw std::invalid_argument("dx and delta must be > 0");
  return cfl * dx / delta;
}

double stable_dt(const SolverState& s, const Profile& p, double cfl) {
  return stable_dt(s.grid.dx(), speed_bound(p), cfl);
}

// ---------------------------------------------------------------------------
// Spatial operators

namespace {

// Fourth-order centred stencils written as sums of symmetric pairs so that odd
// data produce exactly even w_x and exactly odd w_xx.
inline double d1_centered(double wm2, double wm1, double wp1, double wp2, double inv12h) {
  return (8.0 * (wp1 - wm1) - (wp2 - wm2)) * inv12h;
}
inline double d2_centered(double wm2, double wm1, double w0, double wp1, double wp2,
                          double inv12h2) {
  return (16.0 * (wp1 + wm1) - (wp2 + wm2) - 30.0 * w0) * inv12h2;
}

void derivatives(std::span<const double> w, Boundary b, double jump, double dx,
                 std::span<double> wx, std::span<double> wxx) {
  const int n = static_cast<int>(w.size());
  const double i1 = 1.0 / (12.0 * dx);
  const double i2 = 1.0 / (12.0 * dx * dx);
  for (int i = 2; i < n - 2; ++i) {
    wx[i] = d1_centered(w[i - 2], w[i - 1], w[i + 1], w[i + 2], i1);
    wxx[i] = d2_centered(w[i - 2], w[i - 1], w[i], w[i + 1], w[i + 2], i2);
  }
  if (b == Boundary::Periodic) {
    const auto at = [&](int j) {
      if (j < 0) return w[static_cast<std::size_t>(j + n)] - jump;
      if (j >= n) return w[static_cast<std::size_t>(j - n)] + jump;
      return w[static_cast<std::size_t>(j)];
    };
    for (int i : {0, 1, n - 2, n - 1}) {
      wx[i] = d1_centered(at(i - 2), at(i - 1), at(i + 1), at(i + 2), i1);
      wxx[i] = d2_centered(at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2), i2);
    }
    return;
  }
  // One-sided and biased fourth-order closures.
  wx[0] = (-25 * w[0] + 48 * w[1] - 36 * w[2] + 16 * w[3] - 3 * w[4]) * i1;
  wx[1] = (-3 * w[0] - 10 * w[1] + 18 * w[2] - 6 * w[3] + w[4]) * i1;
  wxx[0] = (35 * w[0] - 104 * w[1] + 114 * w[2] - 56 * w[3] + 11 * w[4]) * i2;
  wxx[1] = (11 * w[0] - 20 * w[1] + 6 * w[2] + 4 * w[3] - w[4]) * i2;
  const int m = n - 1;
  wx[m] = -(-25 * w[m] + 48 * w[m - 1] - 36 * w[m - 2] + 16 * w[m - 3] - 3 * w[m - 4]) * i1;
  wx[m - 1] = -(-3 * w[m] - 10 * w[m - 1] + 18 * w[m - 2] - 6 * w[m - 3] + w[m - 4]) * i1;
  wxx[m] = (35 * w[m] - 104 * w[m - 1] + 114 * w[m - 2] - 56 * w[m - 3] + 11 * w[m - 4]) * i2;
  wxx[m - 1] = (11 * w[m] - 20 * w[m - 1] + 6 * w[m - 2] + 4 * w[m - 3] - w[m - 4]) * i2;
}

bool all_finite(const std::vector<double>& a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void spatial_derivatives(const SolverState& s, std::vector<double>& wx, std::vector<double>& wxx) {
  wx.resize(s.w.size());
  wxx.resize(s.w.size());
  derivatives(s.w, s.boundary, s.periodic_jump, s.grid.dx(), wx, wxx);
}

RiemannFields riemann_fields(const SolverState& s) {
  std::vector<double> wx, wxx;
  spatial_derivatives(s, wx, wxx);
  RiemannFields f;
  const std::size_t n = s.w.size();
  f.r.resize(n);
  f.l.resize(n);
  f.eta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double Lw = primitive_L(wx[i]);
    f.r[i] = s.v[i] - Lw;
    f.l[i] = s.v[i] + Lw;
    f.eta[i] = -2.0 * Lw;
  }
  return f;
}

std::vector<double> centered_gradient(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  if (n < 3) throw std::invalid_argument("centered_gradient: need >= 3 samples");
  std::vector<double> g(n);
  const double inv2h = 0.5 / dx;
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (f[i + 1] - f[i - 1]) * inv2h;
  g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
  g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
  return g;
}

double simpson(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * dx * (f[0] + f[1]);
  const std::size_t intervals = n - 1;
  std::size_t start = 0;
  double sum = 0.0;
  if (intervals % 2 == 1) {
    if (intervals == 1) return 0.5 * dx * (f[0] + f[1]);
    // 3/8 panel on the first three intervals.
    sum += 3.0 * dx / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
    start = 3;
  }
  double acc = f[start] + f[n - 1];
  for (std::size_t i = start + 1; i < n - 1; ++i) acc += ((i - start) % 2 == 1 ? 4.0 : 2.0) * f[i];
  return sum + acc * dx / 3.0;
}

Diagnostics diagnostics(const SolverState& s, const Profile& p) {
  std::vector<double> wx, wxx;
  spatial_derivatives(s, wx, wxx);
  const std::size_t n = s.w.size();
  std::vector<double> e(n), v2(n);
  Diagnostics d;
  d.t = s.t;
  for (std::size_t i = 0; i < n; ++i) {
    const double u2 = wx[i] * wx[i];
    v2[i] = s.v[i] * s.v[i];
    e[i] = 0.5 * (v2[i] + u2 * (1.0 + u2 / 6.0));
    d.max_abs_wx = std::max(d.max_abs_wx, std::abs(wx[i]));
    d.max_abs_wxx = std::max(d.max_abs_wxx, std::abs(wxx[i]));
  }
  const double h = s.grid.dx();
  d.E = simpson(e, h);
  d.M = simpson(s.w, h);
  d.kinetic_integral = simpson(v2, h);
  if (s.boundary == Boundary::Dirichlet) {
    d.boundary_slope_error = std::max(std::abs(wx.front() - p.w0_prime(s.grid.x_min)),
                                      std::abs(wx.back() - p.w0_prime(s.grid.x_max)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Time stepping

WaveStepper::WaveStepper(Damping d, Forcing forcing) : damping_(d), forcing_(std::move(forcing)) {}

void WaveStepper::rhs(const SolverState& s, double t, std::span<const double> w,
                      std::span<const double> v, std::span<double> dw, std::span<double> dv) {
  const int n = s.grid.n;
  derivatives(w, s.boundary, s.periodic_jump, s.grid.dx(), wx_, wxx_);
  const double lam = damping_.lambda;
  const bool held = s.boundary == Boundary::Dirichlet;
  for (int i = 0; i < n; ++i) {
    if (held && (i < 2 || i >= n - 2)) {
      dw[i] = 0.0;
      dv[i] = 0.0;
      continue;
    }
    dw[i] = v[i];
    dv[i] = (1.0 + wx_[i] * wx_[i]) * wxx_[i] - lam * v[i];
    if (forcing_) dv[i] += forcing_(t, s.grid.x(i));
  }
}

bool WaveStepper::advance(SolverState& s, double dt) {
  const std::size_t n = s.w.size();
  for (auto* b : {&k1w_, &k1v_, &k2w_, &k2v_, &k3w_, &k3v_, &k4w_, &k4v_, &tw_, &tv_, &wx_, &wxx_}) {
    b->resize(n);
  }
  const double t = s.t;
  rhs(s, t, s.w, s.v, k1w_, k1v_);
  for (std::size_t i = 0; i < n; ++i) {
    tw_[i] = s.w[i] + 0.5 * dt * k1w_[i];
    tv_[i] = s.v[i] + 0.5 * dt * k1v_[i];
  }
  rhs(s, t + 0.5 * dt, tw_, tv_, k2w_, k2v_);
  for (std::size_t i = 0; i < n; ++i) {
    tw_[i] = s.w[i] + 0.5 * dt * k2w_[i];
    tv_[i] = s.v[i] + 0.5 * dt * k2v_[i];
  }
  rhs(s, t + 0.5 * dt, tw_, tv_, k3w_, k3v_);
  for (std::size_t i = 0; i < n; ++i) {
    tw_[i] = s.w[i] + dt * k3w_[i];
    tv_[i] = s.v[i] + dt * k3v_[i];
  }
  rhs(s, t + dt, tw_, tv_, k4w_, k4v_);
  const double c = dt / 6.0;
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    s.w[i] += c * ((k1w_[i] + k4w_[i]) + 2.0 * (k2w_[i] + k3w_[i]));
    s.v[i] += c * ((k1v_[i] + k4v_[i]) + 2.0 * (k2v_[i] + k3v_[i]));
    finite = finite && std::isfinite(s.w[i]) && std::isfinite(s.v[i]);
  }
  s.t = t + dt;
  return finite;
}

SolverState step(const SolverState& s, const Damping& d, double dt) {
  SolverState out = s;
  WaveStepper stepper(d);
  if (!stepper.advance(out, dt)) throw std::runtime_error("step produced non-finite values");
  return out;
}

// ---------------------------------------------------------------------------
// Shock detection

namespace {

struct Indicator {
  double value = 0.0;  // max |r_x|, |l_x| over the grid (interior)
  std::vector<double> positions;
};

// Largest centred gradient of r and l; positions are the arg-max of each
// half of the domain so that symmetric pairs are both reported.
Indicator shock_indicator(const SolverState& s, const RiemannFields& f) {
  const double dx = s.grid.dx();
  const auto gr = centered_gradient(f.r, dx);
  const auto gl = centered_gradient(f.l, dx);
  const int n = s.grid.n;
  Indicator ind;
  double best_left = -1.0, best_right = -1.0;
  int il = -1, ir = -1;
  for (int i = 2; i < n - 2; ++i) {
    const double g = std::max(std::abs(gr[i]), std::abs(gl[i]));
    ind.value = std::max(ind.value, g);
    if (2 * i < n - 1) {
      if (g > best_left) best_left = g, il = i;
    } else if (g > best_right) {
      best_right = g, ir = i;
    }
  }
  if (il >= 0) ind.positions.push_back(s.grid.x(il));
  if (ir >= 0) ind.positions.push_back(s.grid.x(ir));
  return ind;
}

std::vector<double> wxx_peaks(const SolverState& s) {
  std::vector<double> wx, wxx;
  spatial_derivatives(s, wx, wxx);
  const int n = s.grid.n;
  double bl = -1.0, br = -1.0;
  int il = -1, ir = -1;
  for (int i = 2; i < n - 2; ++i) {
    const double g = std::abs(wxx[i]);
    if (2 * i < n - 1) {
      if (g > bl) bl = g, il = i;
    } else if (g > br) {
      br = g, ir = i;
    }
  }
  std::vector<double> out;
  if (il >= 0) out.push_back(s.grid.x(il));
  if (ir >= 0) out.push_back(s.grid.x(ir));
  return out;
}

double max_abs_wx(const SolverState& s) {
  std::vector<double> wx, wxx;
  spatial_derivatives(s, wx, wxx);
  double m = 0.0;
  for (double x : wx) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

SimulationResult simulate(const Profile& p, const Damping& d, const Grid1D& grid,
                          const SimulationConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  if (!(cfg.blow_k > 0.0)) throw std::invalid_argument("blow_k must be > 0");
  if (cfg.snap_every < 0 || cfg.diag_every < 1) {
    throw std::invalid_argument("snap_every must be >= 0 and diag_every >= 1");
  }
  SolverState s = initialize(p, grid, CausalityCheck{cfg.t_end, cfg.tail_tolerance});
  // Strong damping is stiff: RK4 needs lambda dt below about 2.78.
  double dt = stable_dt(s, p, cfg.cfl);
  if (d.lambda > 0.0) dt = std::min(dt, 2.0 / d.lambda);
  const double dx = grid.dx();
  const double threshold = cfg.blow_k / dx;

  SimulationResult out;
  out.dt = dt;
  out.shock.n = grid.n;
  out.shock.dx = dx;
  out.shock.max_wx_initial = max_abs_wx(s);

  std::shared_ptr<History> hist;
  if (cfg.record_history) {
    hist = std::make_shared<History>();
    hist->grid = grid;
    hist->dt = dt;
    hist->damping = d;
  }
  const auto record = [&](const SolverState& st, const RiemannFields& f) {
    if (hist) hist->frames.push_back(Frame{st.t, f.r, f.l});
  };

  WaveStepper stepper(d);
  RiemannFields fields = riemann_fields(s);
  record(s, fields);
  out.diagnostics.push_back(diagnostics(s, p));
  if (cfg.snap_every > 0) out.snapshots.push_back(s);

  const long steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    SolverState prev = s;
    const double h = std::min(dt, cfg.t_end - s.t);
    const bool finite = stepper.advance(s, h);
    std::optional<Indicator> ind;
    if (finite) {
      fields = riemann_fields(s);
      ind = shock_indicator(s, fields);
    }
    const bool crossed = !finite || ind->value > threshold;
    if (crossed && !out.shock.t_star) {
      // Bisect the sub-step length from the last regular state.
      double lo = 0.0, hi = h;
      Indicator at_hi = finite ? *ind : Indicator{};
      SolverState hi_state = s;
      while (hi - lo > 1e-10 * std::max(1.0, prev.t)) {
        const double mid = 0.5 * (lo + hi);
        SolverState trial = prev;
        WaveStepper sub(d);
        bool ok = sub.advance(trial, mid);
        std::optional<Indicator> ti;
        if (ok) ti = shock_indicator(trial, riemann_fields(trial));
        if (!ok || ti->value > threshold) {
          hi = mid;
          if (ok) at_hi = *ti, hi_state = trial;
        } else {
          lo = mid;
        }
      }
      out.shock.t_star = prev.t + hi;
      out.shock.x_star = at_hi.positions;
      if (all_finite(hi_state.w)) {
        out.shock.x_star_wxx = wxx_peaks(hi_state);
        out.shock.max_wx_at_shock = max_abs_wx(hi_state);
      }
      out.pre_shock_state = prev;
      if (cfg.stop_at_shock || !finite) {
        out.final_state = finite ? s : prev;
        if (finite) {
          record(s, fields);
          out.diagnostics.push_back(diagnostics(s, p));
        }
        break;
      }
    }
    if (!finite) {
      out.numerical_failure = !out.shock.t_star;
      out.final_state = prev;
      break;
    }
    record(s, fields);
    if (k % cfg.diag_every == 0 || k == steps) out.diagnostics.push_back(diagnostics(s, p));
    if (cfg.snap_every > 0 && (k % cfg.snap_every == 0 || k == steps)) out.snapshots.push_back(s);
    out.final_state = s;
  }
  if (out.final_state.w.empty()) out.final_state = s;
  out.history = hist;
  return out;
}

std::optional<Extrapolation> richardson(double coarse, double medium, double fine, double ratio) {
  const double d1 = medium - coarse;
  const double d2 = fine - medium;
  if (!(ratio > 1.0) || d1 == 0.0 || d2 == 0.0 || sgn(d1) != sgn(d2) ||
      std::abs(d2) >= std::abs(d1)) {
    return std::nullopt;
  }
  const double order = std::log(d1 / d2) / std::log(ratio);
  const double limit = fine + d2 / (std::pow(ratio, order) - 1.0);
  return Extrapolation{limit, order};
}

ShockReport detect_shock(std::span<const GridShock> grids, double blow_k, double horizon) {
  if (grids.size() < 2) throw std::invalid_argument("detect_shock: need at least two grids");
  ShockReport rep;
  char tag[96];
  std::snprintf(tag, sizeof tag, "max|d_x r| > %.3g/dx", blow_k);
  rep.criterion = tag;
  rep.horizon = horizon;
  rep.grids_used.assign(grids.begin(), grids.end());
  const GridShock& finest = grids.back();
  if (!finest.t_star) return rep;
  rep.detected = true;
  rep.t_star = finest.t_star;
  rep.x_star_positions = finest.x_star;

  bool all = std::all_of(grids.begin(), grids.end(), [](const GridShock& g) { return g.t_star.has_value(); });
  if (all) {
    rep.confirmed = true;
    for (std::size_t i = 1; i < grids.size(); ++i) {
      const double a = *grids[i - 1].t_star, b = *grids[i].t_star;
      if (std::abs(a - b) >= 0.05 * std::abs(b)) rep.confirmed = false;
    }
    if (grids.size() >= 3) {
      const std::size_t m = grids.size();
      const double ratio = grids[m - 3].dx / grids[m - 2].dx;
      if (auto ex = richardson(*grids[m - 3].t_star, *grids[m - 2].t_star, *grids[m - 1].t_star,
                               ratio)) {
        rep.richardson_t_star = ex->limit;
        rep.observed_order = ex->order;
        rep.t_star = ex->limit;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Upwind oracle

UpwindRun upwind_run(const Profile& p, const Damping& d, const Grid1D& grid, double cfl,
                     double t_end, double blow_k) {
  if (!(t_end > 0.0) || !(blow_k > 0.0)) throw std::invalid_argument("upwind: t_end and blow_k must be > 0");
  const double dx = grid.dx();
  const double dt = stable_dt(dx, speed_bound(p), cfl);
  const int n = grid.n;
  UpwindRun out;
  auto& r = out.r;
  auto& l = out.l;
  r.resize(n);
  l.resize(n);
  std::vector<double> rn(n), ln(n);
  for (int i = 0; i < n; ++i) {
    r[i] = p.r0(grid.x(i));
    l[i] = -r[i];
  }
  out.shock.n = n;
  out.shock.dx = dx;
  const double threshold = blow_k / dx;
  const double half_lam = 0.5 * d.lambda;
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double h = std::min(dt, t_end - out.t);
    for (int i = 1; i < n - 1; ++i) {
      const double c = k_of_eta(r[i] - l[i]);
      const double src = -half_lam * (r[i] + l[i]);
      rn[i] = r[i] - h / dx * c * (r[i] - r[i - 1]) + h * src;
      ln[i] = l[i] + h / dx * c * (l[i + 1] - l[i]) + h * src;
    }
    rn[0] = r[0];
    ln[0] = l[0];
    rn[n - 1] = r[n - 1];
    ln[n - 1] = l[n - 1];
    r.swap(rn);
    l.swap(ln);
    out.t += h;
    double best = 0.0;
    int at = -1;
    for (int i = 1; i < n - 1; ++i) {
      const double g = std::max(std::abs(r[i + 1] - r[i - 1]), std::abs(l[i + 1] - l[i - 1])) / (2 * dx);
      if (!(g <= best)) best = g, at = i;
    }
    if (!std::isfinite(best) || best > threshold) {
      out.shock.t_star = out.t;
      if (at >= 0) out.shock.x_star.push_back(grid.x(at));
      break;
    }
  }
  return out;
}

}  // namespace twistshock
