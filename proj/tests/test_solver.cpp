#include "twistshock/estimator.hpp"
#include "twistshock/solver.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace twistshock;

namespace {

const KinkProfile kQuarter(M_PI / 4, 0.5);
const Damping kHeadline(0.18);

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// One coarse run shared by several tests.
const SimulationResult& coarse_run() {
  static const SimulationResult r = [] {
    SimulationConfig cfg;
    cfg.t_end = 6.0;
    return simulate(kQuarter, kHeadline, Grid1D::symmetric(30.0, 0.02), cfg);
  }();
  return r;
}

}  // namespace

TEST(Grid, Construction) {
  EXPECT_THROW(Grid1D::make(0.0, 1.0, 15), std::invalid_argument);
  EXPECT_THROW(Grid1D::make(1.0, 1.0, 100), std::invalid_argument);
  const auto g = Grid1D::make(-1.0, 1.0, 201);
  EXPECT_NEAR(g.dx(), 0.01, 1e-15);
  const auto s = Grid1D::symmetric(40.0, 0.01);
  EXPECT_EQ(s.n % 2, 1);
  for (int i = 0; i < s.n; ++i) ASSERT_EQ(s.x(s.n - 1 - i), -s.x(i));
  EXPECT_EQ(s.x(s.n / 2), 0.0);
}

TEST(StableDt, Values) {
  const auto s = initialize(kQuarter, Grid1D::symmetric(40.0, 0.01));
  EXPECT_NEAR(stable_dt(s, kQuarter, 0.5), 0.005 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(stable_dt(s, kQuarter, 0.5), 0.003536, 1e-6);
  EXPECT_EQ(stable_dt(0.02, 1.0, 1.0), 0.02);
  EXPECT_DOUBLE_EQ(stable_dt(0.04, 1.3, 0.7), 2 * stable_dt(0.02, 1.3, 0.7));
  EXPECT_THROW(stable_dt(0.01, 1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(stable_dt(0.01, 1.0, 0.0), std::invalid_argument);
}

TEST(Initialize, KinkData) {
  const auto s = initialize(kQuarter, Grid1D::symmetric(40.0, 0.01));
  EXPECT_EQ(s.t, 0.0);
  EXPECT_EQ(s.w[static_cast<std::size_t>(s.grid.n / 2)], 0.0);
  EXPECT_EQ(max_abs(s.v), 0.0);
  const auto d = diagnostics(s, kQuarter);
  EXPECT_NEAR(d.M, 0.0, 1e-12);
  // E(0) = 1/2 int w0'^2 (1 + w0'^2 / 6) over the domain.
  const double ref = oracle::simpson(
      [](double x) {
        const double u = 0.25 / (x * x + 0.25);
        return 0.5 * u * u * (1 + u * u / 6);
      },
      -40.0, 40.0, 200000);
  EXPECT_GT(d.E, 0.0);
  // Slopes come from fourth-order differences: O(dx^4) with a large constant.
  EXPECT_NEAR(d.E, ref, 1e-7);
  EXPECT_NEAR(d.max_abs_wx, 1.0, 1e-6);
}

TEST(Initialize, CausalityRejected) {
  CausalityCheck check;
  check.t_end = 6.0;
  const double need = required_half_width(kQuarter, check);
  EXPECT_NEAR(need, std::sqrt(0.25 / 1e-3 - 0.25) + std::sqrt(2.0) * 6.0, 1e-3);
  try {
    initialize(kQuarter, Grid1D::symmetric(need - 1.0, 0.05), check);
    FAIL() << "expected CausalityError";
  } catch (const CausalityError& e) {
    EXPECT_EQ(e.required_half_width(), need);
    EXPECT_NE(std::string(e.what()).find("causality"), std::string::npos);
  }
  EXPECT_NO_THROW(initialize(kQuarter, Grid1D::symmetric(need + 0.1, 0.05), check));
}

TEST(Riemann, InitialFields) {
  double err[2];
  const double dxs[2] = {0.02, 0.01};
  for (int j = 0; j < 2; ++j) {
    const auto s = initialize(kQuarter, Grid1D::symmetric(20.0, dxs[j]));
    const auto f = riemann_fields(s);
    double e = 0.0;
    for (int i = 0; i < s.grid.n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      e = std::max(e, std::abs(f.r[k] - kQuarter.r0(s.grid.x(i))));
      ASSERT_EQ(f.l[k], -f.r[k]);
      ASSERT_EQ(f.eta[k], 2 * f.r[k]);
    }
    err[j] = e;
  }
  EXPECT_LT(err[1], 1e-6);
  EXPECT_NEAR(std::log2(err[0] / err[1]), 4.0, 0.3);
}

TEST(Step, ConstantSlopeIsStationary) {
  const int n = 64;
  const double c = 0.7;
  const auto g = Grid1D::make(0.0, 1.0, n);
  const double period = n * g.dx();
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = c * g.x(i);
  auto s = initialize_periodic(g, w, std::vector<double>(n, 0.0), c * period);
  WaveStepper st(kHeadline);
  for (int k = 0; k < 200; ++k) ASSERT_TRUE(st.advance(s, 0.005));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    ASSERT_NEAR(s.w[k], w[k], 1e-13);
    ASSERT_NEAR(s.v[k], 0.0, 1e-12);
  }
}

TEST(Step, PreservesOddSymmetry) {
  auto s = initialize(kQuarter, Grid1D::symmetric(20.0, 0.02));
  for (int k = 0; k < 50; ++k) s = step(s, kHeadline, 0.01);
  const int n = s.grid.n;
  for (int i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
    ASSERT_LE(std::abs(s.w[a] + s.w[b]), 1e-12);
    ASSERT_LE(std::abs(s.v[a] + s.v[b]), 1e-12);
  }
}

TEST(Step, NonFiniteStateThrows) {
  auto s = initialize(kQuarter, Grid1D::symmetric(10.0, 0.05));
  s.w[10] = NAN;
  EXPECT_THROW(step(s, kHeadline, 0.01), std::runtime_error);
}

TEST(Step, OverdampedDecayMatchesLinearTheory) {
  // Small sinusoid, lambda well above 2 |wavenumber|: both modes decay
  // without oscillation.
  const int n = 128;
  const double period = 2 * M_PI, eps = 1e-4, lam = 6.0;
  const auto g = Grid1D::make(0.0, period * (n - 1) / n, n);
  std::vector<double> w(n), v(n, 0.0);
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = eps * std::sin(g.x(i));
  auto s = initialize_periodic(g, w, v, 0.0);
  WaveStepper st{Damping(lam)};
  const double s1 = 0.5 * (-lam + std::sqrt(lam * lam - 4)), s2 = 0.5 * (-lam - std::sqrt(lam * lam - 4));
  // w(t) = eps (s1 e^{s2 t} - s2 e^{s1 t}) / (s1 - s2), v = w'.
  auto v_exact = [&](double t) { return eps * s1 * s2 * (std::exp(s2 * t) - std::exp(s1 * t)) / (s1 - s2); };
  const double dt = 0.01;
  double peak_t = std::log(s1 / s2) / (s2 - s1);
  double prev = 0.0;
  for (int k = 1; k <= 600; ++k) {
    ASSERT_TRUE(st.advance(s, dt));
    const double sup = max_abs(s.v);
    EXPECT_NEAR(sup, std::abs(v_exact(s.t)), 1e-4 * eps) << s.t;
    if (s.t > peak_t + dt) {
      ASSERT_LT(sup, prev) << s.t;
    }
    prev = sup;
  }
}

namespace {

// Manufactured solution w = a sin(x) cos(t) + b sin(2x) sin(t) on [0, 2 pi).
struct Manufactured {
  double a = 0.3, b = 0.1, lam = 0.5;
  double w(double t, double x) const { return a * std::sin(x) * std::cos(t) + b * std::sin(2 * x) * std::sin(t); }
  double v(double t, double x) const { return -a * std::sin(x) * std::sin(t) + b * std::sin(2 * x) * std::cos(t); }
  double forcing(double t, double x) const {
    const double wtt = -w(t, x);
    const double wx = a * std::cos(x) * std::cos(t) + 2 * b * std::cos(2 * x) * std::sin(t);
    const double wxx = -a * std::sin(x) * std::cos(t) - 4 * b * std::sin(2 * x) * std::sin(t);
    return wtt - (1 + wx * wx) * wxx + lam * v(t, x);
  }
};

SolverState manufactured_state(const Manufactured& m, int n) {
  const auto g = Grid1D::make(0.0, 2 * M_PI * (n - 1) / n, n);
  std::vector<double> w(n), v(n);
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = m.w(0, g.x(i));
    v[static_cast<std::size_t>(i)] = m.v(0, g.x(i));
  }
  return initialize_periodic(g, w, v, 0.0);
}

SolverState run_manufactured(const Manufactured& m, int n, double dt, double t_end) {
  auto s = manufactured_state(m, n);
  WaveStepper st(Damping(m.lam), [m](double t, double x) { return m.forcing(t, x); });
  const int steps = static_cast<int>(std::lround(t_end / dt));
  for (int k = 0; k < steps; ++k) st.advance(s, dt);
  return s;
}

}  // namespace

TEST(Manufactured, FourthOrderInTime) {
  // Same grid, three steps: spatial error cancels in the differences.
  const Manufactured m;
  const int n = 64;
  const auto a = run_manufactured(m, n, 0.04, 2.0);
  const auto b = run_manufactured(m, n, 0.02, 2.0);
  const auto c = run_manufactured(m, n, 0.01, 2.0);
  double dab = 0, dbc = 0;
  for (std::size_t i = 0; i < a.w.size(); ++i) {
    dab = std::max(dab, std::abs(a.w[i] - b.w[i]));
    dbc = std::max(dbc, std::abs(b.w[i] - c.w[i]));
  }
  EXPECT_NEAR(std::log2(dab / dbc), 4.0, 0.3);
}

TEST(Manufactured, SpatialOrderAtLeastSecond) {
  const Manufactured m;
  double err[3];
  const int ns[3] = {32, 64, 128};
  for (int j = 0; j < 3; ++j) {
    const double dx = 2 * M_PI / ns[j];
    const auto s = run_manufactured(m, ns[j], 0.25 * dx, 2.0);
    double e = 0;
    for (int i = 0; i < ns[j]; ++i) e = std::max(e, std::abs(s.w[static_cast<std::size_t>(i)] - m.w(s.t, s.grid.x(i))));
    err[j] = e;
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 2.0);
  EXPECT_GE(std::log2(err[1] / err[2]), 2.0);
  // The stencils are fourth order; the observed rate should show it.
  EXPECT_GT(std::log2(err[1] / err[2]), 3.5);
}

TEST(Simulate, EnergyDecreasesAndMassVanishes) {
  const auto& r = coarse_run();
  ASSERT_TRUE(r.shock.t_star.has_value());
  for (std::size_t i = 1; i + 1 < r.diagnostics.size(); ++i) {
    ASSERT_LT(r.diagnostics[i].E, r.diagnostics[i - 1].E) << r.diagnostics[i].t;
    ASSERT_LT(std::abs(r.diagnostics[i].M), 1e-8);
    ASSERT_GE(r.diagnostics[i].E, 0.0);
  }
}

TEST(Simulate, InviscidEnergyConserved) {
  SimulationConfig cfg;
  cfg.t_end = 6.0;
  const auto r = simulate(kQuarter, Damping(0.0), Grid1D::symmetric(30.0, 0.02), cfg);
  ASSERT_TRUE(r.shock.t_star.has_value());
  const double e0 = r.diagnostics.front().E;
  for (const auto& d : r.diagnostics) {
    if (d.t > 0.9 * *r.shock.t_star) break;
    ASSERT_LT(std::abs(d.E - e0) / e0, 1e-4) << d.t;
  }
  // Damping delays breakdown on the same grid.
  EXPECT_LT(*r.shock.t_star, *coarse_run().shock.t_star);
}

TEST(Simulate, RiemannFieldsStayBounded) {
  SimulationConfig cfg;
  cfg.t_end = 6.0;
  cfg.snap_every = 20;
  const auto r = simulate(kQuarter, kHeadline, Grid1D::symmetric(30.0, 0.01), cfg);
  ASSERT_TRUE(r.shock.t_star.has_value());
  const double bound = kQuarter.sup_norm_r0() * 1.02;
  for (const auto& s : r.snapshots) {
    if (s.t > *r.shock.t_star) break;
    const auto f = riemann_fields(s);
    ASSERT_LE(max_abs(f.r), bound) << s.t;
    ASSERT_LE(max_abs(f.l), bound) << s.t;
  }
}

TEST(Simulate, FarFieldSlopePinned) {
  // Wide domain, horizon well inside the causal margin.
  SimulationConfig cfg;
  cfg.t_end = 2.0;
  cfg.tail_tolerance = 1e-5;
  const auto r = simulate(kQuarter, kHeadline, Grid1D::symmetric(160.0 + 1.5 * 2.0, 0.05), cfg);
  for (const auto& d : r.diagnostics) ASSERT_LE(d.boundary_slope_error, 1e-6) << d.t;
}

TEST(Simulate, ShockIsSymmetricAndBeforeEstimate) {
  const auto& r = coarse_run();
  ASSERT_TRUE(r.shock.t_star.has_value());
  const auto est = critical_time_estimate(kQuarter, kHeadline, default_alpha_grid(kQuarter));
  ASSERT_TRUE(est.accepted);
  EXPECT_LT(*r.shock.t_star, est.t_c_final);
  ASSERT_EQ(r.shock.x_star.size(), 2u);
  EXPECT_NEAR(r.shock.x_star[0], -r.shock.x_star[1], 1e-9);
  ASSERT_EQ(r.shock.x_star_wxx.size(), 2u);
  EXPECT_NEAR(r.shock.x_star_wxx[0], -r.shock.x_star_wxx[1], 2 * r.shock.dx);
  EXPECT_TRUE(r.pre_shock_state.has_value());
  EXPECT_FALSE(r.numerical_failure);
}

TEST(Simulate, StrongDampingStaysStable) {
  // lambda dt would be ~20 at the wave-speed step; the run must shorten dt
  // instead of mistaking the RK4 instability for a shock.
  SimulationConfig cfg;
  cfg.t_end = 1.0;
  const auto r = simulate(kQuarter, Damping(3000.0), Grid1D::symmetric(20.0, 0.02), cfg);
  EXPECT_LE(r.dt * 3000.0, 2.0 + 1e-12);
  EXPECT_FALSE(r.shock.t_star.has_value());
  EXPECT_FALSE(r.numerical_failure);
  EXPECT_LE(r.diagnostics.back().E, r.diagnostics.front().E);
  // Overdamped: w barely moves from its initial data.
  EXPECT_LT(r.diagnostics.back().max_abs_wx, 1.0);
}

TEST(Simulate, FlatProfileNeverShocks) {
  const FunctionProfile flat({[](double) { return 0.0; }, [](double) { return 0.0; },
                              [](double) { return 0.0; }},
                             0.0, 0.0);
  SimulationConfig cfg;
  cfg.t_end = 20.0;
  const auto r = simulate(flat, kHeadline, Grid1D::symmetric(25.0, 0.05), cfg);
  EXPECT_FALSE(r.shock.t_star.has_value());
  EXPECT_EQ(max_abs(r.final_state.w), 0.0);
  EXPECT_NEAR(r.final_state.t, 20.0, 1e-9);

  GridShock a, b;
  a.dx = 0.05;
  b.dx = 0.025;
  const GridShock both[] = {a, b};
  const auto rep = detect_shock(both, 0.1, 20.0);
  EXPECT_FALSE(rep.detected);
  EXPECT_FALSE(rep.t_star.has_value());
  EXPECT_EQ(rep.horizon, 20.0);
}

TEST(DetectShock, MergesGrids) {
  auto make = [](double dx, double t) {
    GridShock g;
    g.dx = dx;
    g.t_star = t;
    g.x_star = {-1.0, 1.0};
    return g;
  };
  const GridShock one[] = {make(0.02, 3.0)};
  EXPECT_THROW(detect_shock(one, 0.1, 6.0), std::invalid_argument);

  // t(dx) = 4 - 50 dx^2: order 2, limit 4.
  const GridShock three[] = {make(0.04, 4 - 50 * 0.0016), make(0.02, 4 - 50 * 0.0004),
                             make(0.01, 4 - 50 * 0.0001)};
  const auto rep = detect_shock(three, 0.1, 6.0);
  EXPECT_TRUE(rep.detected);
  ASSERT_TRUE(rep.richardson_t_star.has_value());
  EXPECT_NEAR(*rep.richardson_t_star, 4.0, 1e-12);
  EXPECT_NEAR(*rep.observed_order, 2.0, 1e-9);
  EXPECT_EQ(*rep.t_star, *rep.richardson_t_star);
  EXPECT_TRUE(rep.confirmed);
  EXPECT_FALSE(rep.criterion.empty());

  const GridShock spread[] = {make(0.02, 2.5), make(0.01, 3.3)};
  const auto loose = detect_shock(spread, 0.1, 6.0);
  EXPECT_TRUE(loose.detected);
  EXPECT_FALSE(loose.confirmed);
  EXPECT_EQ(*loose.t_star, 3.3);
}

TEST(Richardson, Helper) {
  const auto e = richardson(1 + 0.8, 1 + 0.2, 1 + 0.05);
  ASSERT_TRUE(e.has_value());
  EXPECT_NEAR(e->limit, 1.0, 1e-12);
  EXPECT_NEAR(e->order, 2.0, 1e-12);
  EXPECT_FALSE(richardson(1.0, 2.0, 1.0).has_value());
}

TEST(Quadrature, SimpsonAndGradient) {
  std::vector<double> cubic, quad;
  const double h = 0.1;
  for (int i = 0; i <= 10; ++i) cubic.push_back(std::pow(i * h, 3));
  EXPECT_NEAR(simpson(cubic, h), 0.25, 1e-14);  // even interval count
  cubic.push_back(std::pow(1.1, 3));
  EXPECT_NEAR(simpson(cubic, h), std::pow(1.1, 4) / 4, 1e-14);  // odd count, 3/8 panel
  for (int i = 0; i <= 10; ++i) quad.push_back(3 * (i * h) * (i * h) - i * h);
  const auto g = centered_gradient(quad, h);
  for (int i = 0; i <= 10; ++i) EXPECT_NEAR(g[static_cast<std::size_t>(i)], 6 * i * h - 1, 1e-12);
}

TEST(Upwind, FirstOrderAgreementBeforeSteepening) {
  // Reference: the fourth-order scheme on a fine grid at t = 1, before the
  // front is steep enough to push the upwind error out of its asymptotic
  // range.  L1 norm.
  SimulationConfig cfg;
  cfg.t_end = 1.0;
  const double X = 20.0;
  const auto ref = simulate(kQuarter, kHeadline, Grid1D::symmetric(X, 0.0025), cfg);
  const auto ref_f = riemann_fields(ref.final_state);
  const auto& rg = ref.final_state.grid;
  double err[3];
  const double dxs[3] = {0.02, 0.01, 0.005};
  for (int j = 0; j < 3; ++j) {
    const auto g = Grid1D::symmetric(X, dxs[j]);
    const auto u = upwind_run(kQuarter, kHeadline, g, 0.5, 1.0, 0.1);
    EXPECT_NEAR(u.t, 1.0, 1e-9);
    EXPECT_FALSE(u.shock.t_star.has_value());
    const int stride = static_cast<int>(std::lround(dxs[j] / rg.dx()));
    double e = 0;
    for (int i = 0; i < g.n; ++i) {
      const int k = i * stride;
      ASSERT_NEAR(g.x(i), rg.x(k), 1e-9);
      e += dxs[j] * std::abs(u.r[static_cast<std::size_t>(i)] - ref_f.r[static_cast<std::size_t>(k)]);
    }
    err[j] = e;
  }
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  EXPECT_NEAR(o1, 1.0, 0.1);
  EXPECT_NEAR(o2, 1.0, 0.1);
  EXPECT_GT(o2, o1);
}
