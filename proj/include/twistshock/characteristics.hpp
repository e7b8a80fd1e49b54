// Characteristic curves through a recorded simulation and the quantities
// carried along them: weighted Riemann derivatives, compression ratios, the
// Riccati comparison bound and pre-breakdown envelope checks.
#pragma once

#include "twistshock/kernels.hpp"
#include "twistshock/profiles.hpp"
#include "twistshock/solver.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace twistshock {

struct TraceSample {
  double t = 0.0;
  double x = 0.0;
  double eta = 0.0;
  double pq = 0.0;      // p on forward curves, q on backward ones, from the field
  double pq_ode = 0.0;  // same quantity integrated along the curve
  double cross = 0.0;   // the other weighted derivative (q on forward curves)
  double c = 1.0;       // compression ratio, filled by compression_ratio
  double phi = 0.0;     // Riccati bound, filled by phi_lower_bound (NaN when absent)
};

struct CharTrace {
  Family family = Family::Forward;
  double origin = 0.0;
  std::vector<TraceSample> samples;  // every second solver step
  std::optional<double> exit_time;   // set when the curve left the grid
};

/// Integrates dx/dt = +-k(eta) by RK4 with step 2 dt over consecutive history
/// frames, so no interpolation in time is needed.
CharTrace trace(const History& h, Family family, double origin, double t_end);

/// Foot at t = 0 of the backward characteristic through (t, x1(t, alpha)).
/// t is rounded to the nearest even frame.
double beta_of_alpha(const History& h, double t, double alpha);

/// Foot of the backward curve through (frame index, x); frame must be even.
double backward_foot(const History& h, std::size_t frame, double x);

/// c(t) = sqrt(k(eta)/k(2 r0(origin))) exp(int A^-1 f(eta) pq), trapezoid
/// rule on the samples.  Also stores c in the trace.
std::vector<std::pair<double, double>> compression_ratio(CharTrace& tr, const Profile& p,
                                                         const Damping& d);

struct PhiBound {
  std::vector<std::pair<double, double>> values;  // ends when the bound blows up
  std::optional<double> blowup_time;  // zero of the denominator, if reached
  double denominator_at_end = 1.0;
};

/// Phi(t) = -|p0| / (1 - |p0| int A^-1 f(eta)).  Forward traces only; p0 is
/// the trace's value at t = 0 and must be negative.
PhiBound phi_lower_bound(CharTrace& tr, const Damping& d);

struct CheckResult {
  bool pass = true;
  double worst_margin = 0.0;  // smallest signed margin (>= 0 when passing)
  int checked = 0;
  int violations = 0;
};

struct EnvelopeReport {
  double t_cut = 0.0;
  CheckResult envelope;       // eta_L <= eta <= eta_U with the traced beta
  CheckResult sign;           // sgn eta(t, x1) == sgn eta(0, alpha)
  CheckResult integral_q;     // sgn(r0'(alpha) int q) == -1 where selection holds
  CheckResult beta_confined;  // alpha <= beta <= alpha + 2 delta t
  CheckResult beta_monotone;  // beta strictly increasing
  std::vector<std::pair<double, double>> beta;  // (t, beta(t, alpha))
  bool all_pass() const {
    return envelope.pass && sign.pass && integral_q.pass && beta_confined.pass &&
           beta_monotone.pass;
  }
};

/// Verifies the pre-breakdown lemmas along a forward trace for t <= t_cut.
EnvelopeReport check_envelopes(const History& h, const CharTrace& tr, const Profile& p,
                               const Damping& d, double t_cut);

}  // namespace twistshock
