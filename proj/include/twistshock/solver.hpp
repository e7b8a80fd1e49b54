// Direct integration of the damped twist equation
//     w_tt - (1 + w_x^2) w_xx = -lambda w_t
// on a truncated uniform grid by the method of lines: fourth-order centred
// differences in space, classical RK4 in time on (w, v = w_t).
#pragma once

#include "twistshock/kernels.hpp"
#include "twistshock/profiles.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twistshock {

enum class Boundary {
  /// The two outermost nodes on each side keep their initial values with
  /// v = 0.  Valid while the boundary is causally disconnected from the core.
  Dirichlet,
  /// w(x + P) = w(x) + jump with period P = n dx; used for manufactured and
  /// constant-slope tests.
  Periodic,
};

struct Grid1D {
  double x_min = 0.0;
  double x_max = 0.0;
  int n = 0;

  /// Validating constructor: x_max > x_min and n >= 16.
  static Grid1D make(double x_min, double x_max, int n);
  /// Grid on [-half_width, half_width] with spacing as close to dx as an
  /// integer node count allows.
  static Grid1D symmetric(double half_width, double dx);

  double dx() const { return (x_max - x_min) / (n - 1); }
  /// Nodes are placed from the nearer end so that symmetric grids satisfy
  /// x(n-1-i) == -x(i) exactly.
  double x(int i) const;
  std::vector<double> nodes() const;
};

struct SolverState {
  double t = 0.0;
  std::vector<double> w;
  std::vector<double> v;
  Grid1D grid;
  Boundary boundary = Boundary::Dirichlet;
  double periodic_jump = 0.0;  // w(x + P) - w(x) for periodic grids
};

struct Diagnostics {
  double t = 0.0;
  double E = 0.0;            // 1/2 int v^2 + w_x^2 (1 + w_x^2/6)
  double M = 0.0;            // int w over the truncated domain
  double max_abs_wx = 0.0;
  double max_abs_wxx = 0.0;
  double boundary_slope_error = 0.0;
  double kinetic_integral = 0.0;  // int v^2, the dissipation rate over lambda
};

/// Thrown when the requested horizon lets boundary effects reach the core.
class CausalityError : public std::invalid_argument {
 public:
  CausalityError(const std::string& what, double required_half_width)
      : std::invalid_argument(what), required_half_width_(required_half_width) {}
  double required_half_width() const { return required_half_width_; }

 private:
  double required_half_width_;
};

struct CausalityCheck {
  double t_end = 0.0;
  /// |w0'(x) - w0'(+-inf)| below this counts as far field.
  double tail_tolerance = 1e-3;
};

/// Half-width a symmetric Dirichlet domain needs for the given horizon:
/// the far-field cutoff plus delta * t_end on each side.
double required_half_width(const Profile& p, const CausalityCheck& check);

/// w = w0 samples, v = 0, t = 0.  With a positive t_end the Dirichlet grid is
/// checked against the causal reach and a CausalityError names the bound.
SolverState initialize(const Profile& p, const Grid1D& grid, const CausalityCheck& check = {});

/// Initial state for periodic runs from explicit samples.
SolverState initialize_periodic(const Grid1D& grid, std::vector<double> w, std::vector<double> v,
                                double jump);

/// dt = cfl dx / delta with delta = k(2 ||r0||).
double stable_dt(const SolverState& s, const Profile& p, double cfl);
double stable_dt(double dx, double delta, double cfl);

/// Space-time source added to the v equation (manufactured solutions).
using Forcing = std::function<double(double t, double x)>;

/// Reusable RK4 integrator with scratch storage for one grid.
class WaveStepper {
 public:
  WaveStepper(Damping d, Forcing forcing = {});

  /// Advances s in place by dt.  Returns false if a non-finite value appears.
  bool advance(SolverState& s, double dt);

 private:
  void rhs(const SolverState& s, double t, std::span<const double> w, std::span<const double> v,
           std::span<double> dw, std::span<double> dv);

  Damping damping_;
  Forcing forcing_;
  std::vector<double> k1w_, k1v_, k2w_, k2v_, k3w_, k3v_, k4w_, k4v_, tw_, tv_, wx_, wxx_;
};

/// One RK4 step; throws std::runtime_error when the result is non-finite.
SolverState step(const SolverState& s, const Damping& d, double dt);

/// Fourth-order first and second x-derivatives of w (one-sided at Dirichlet
/// ends).
void spatial_derivatives(const SolverState& s, std::vector<double>& wx, std::vector<double>& wxx);

struct RiemannFields {
  std::vector<double> r;
  std::vector<double> l;
  std::vector<double> eta;
};

/// r = v - L(w_x), l = v + L(w_x), eta = r - l.
RiemannFields riemann_fields(const SolverState& s);

/// Second-order centred derivative of a grid field; one-sided at the ends.
std::vector<double> centered_gradient(std::span<const double> f, double dx);

/// Energy by composite Simpson, truncated mass, field extrema.  w0_prime
/// supplies the reference slopes for the boundary-slope error.
Diagnostics diagnostics(const SolverState& s, const Profile& p);

/// Composite Simpson (with a 3/8 panel when the interval count is odd).
double simpson(std::span<const double> f, double dx);

// ---------------------------------------------------------------------------
// Runs and shock detection

/// r and l on the whole grid at one time level.
struct Frame {
  double t = 0.0;
  std::vector<double> r;
  std::vector<double> l;
};

/// Immutable record of a run at every solver step, shared read-only by
/// characteristic traces.
struct History {
  Grid1D grid;
  double dt = 0.0;
  Damping damping;
  std::vector<Frame> frames;
};

struct SimulationConfig {
  double cfl = 0.5;
  double t_end = 6.0;
  int snap_every = 0;       // 0 disables snapshots
  int diag_every = 1;       // diagnostics cadence in steps
  double blow_k = 0.1;      // shock when max |r_x| > blow_k / dx
  bool stop_at_shock = true;
  bool record_history = false;
  double tail_tolerance = 1e-3;
};

/// Shock detection on one grid.
struct GridShock {
  int n = 0;
  double dx = 0.0;
  std::optional<double> t_star;
  std::vector<double> x_star;  // arg-max positions of |r_x| and |l_x|
  std::vector<double> x_star_wxx;  // arg-max positions of |w_xx|, one per half-line
  double max_wx_initial = 0.0;
  double max_wx_at_shock = 0.0;
};

struct SimulationResult {
  double dt = 0.0;
  std::vector<SolverState> snapshots;
  std::vector<Diagnostics> diagnostics;
  GridShock shock;
  SolverState final_state;
  /// State at the last full step before the detected shock.
  std::optional<SolverState> pre_shock_state;
  std::shared_ptr<const History> history;
  bool numerical_failure = false;  // non-finite values without a detected shock
};

SimulationResult simulate(const Profile& p, const Damping& d, const Grid1D& grid,
                          const SimulationConfig& cfg);

struct ShockReport {
  bool detected = false;
  std::optional<double> t_star;  // extrapolated when >= 3 grids agree, else finest
  std::vector<double> x_star_positions;
  std::string criterion;
  std::vector<GridShock> grids_used;
  std::optional<double> richardson_t_star;
  std::optional<double> observed_order;
  bool confirmed = false;  // t_star(dx) varies < 5% between refinements
  double horizon = 0.0;
};

/// Merges per-grid detections (ordered coarse to fine).  Requires at least
/// two grids.
ShockReport detect_shock(std::span<const GridShock> grids, double blow_k, double horizon);

/// Richardson extrapolation from three values on grids refined by `ratio`.
/// Returns {limit, observed order}; nullopt when the differences do not
/// contract monotonically.
struct Extrapolation {
  double limit;
  double order;
};
std::optional<Extrapolation> richardson(double coarse, double medium, double fine,
                                        double ratio = 2.0);

/// Independent first-order upwind integration of the diagonal (r, l)
/// system, used to cross-check the main scheme.
struct UpwindRun {
  GridShock shock;
  double t = 0.0;  // time reached (t_end, or the detection time)
  std::vector<double> r;
  std::vector<double> l;
};
UpwindRun upwind_run(const Profile& p, const Damping& d, const Grid1D& grid, double cfl,
                     double t_end, double blow_k);

}  // namespace twistshock
