// Analytical shock-time prediction along characteristics.
//
// For an admissible origin a, the envelope
//   eta_L(t, a) = A^{-1}(r0(a + 2 delta t) + r0(a)) + 2 r0(a + 2 delta t)(1 - A^{-1})
// bounds eta along the forward characteristic from a, and the first zero of
//   R(t) = 1 - (2/lambda)(1 - A^{-1}) gamma(t) |r0'(a)| sqrt(k(2 r0(a))),
//   gamma(t) = min{|f(eta_L(t, a))|, |f(2 r0(a))|},
// is an upper estimate t_c(lambda, a) for the blow-up of r_x along it.  The
// estimate is only trusted when the selection residual
//   S(t) = -2(A - 1)/sqrt(k(eta_L)) + (2 - A^{-1})/sqrt(k(2 r0(a)))
// is nonnegative at t = t_c.  Backward origins use a - 2 delta t.
#pragma once

#include "twistshock/kernels.hpp"
#include "twistshock/profiles.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twistshock {

enum class TcStatus { RootSelected, RootRejected, NoRoot };
std::string_view to_string(TcStatus s);

/// Why a scan ended without a root.
enum class NoRootReason {
  None,
  ResidualPositive,  // residual flat or rising at the end of the scan
  RangeTooSmall,     // residual still decreasing at t_scan_max: inconclusive
};
std::string_view to_string(NoRootReason r);

struct ResidualSample {
  double t;
  double residual;
};

struct CriticalTimeResult {
  double origin = 0.0;
  Family family = Family::Forward;
  std::optional<double> t_c;
  std::vector<ResidualSample> residual_path;  // coarse scan samples up to the root
  std::optional<double> selection_residual_at_tc;
  TcStatus status = TcStatus::NoRoot;
  NoRootReason no_root_reason = NoRootReason::None;
};

struct RootScan {
  double t_scan_max = 200.0;
  int points = 2000;
  double t_tol = 1e-9;
  bool keep_path = false;
};

/// Best origin for one characteristic family.
struct FamilyEstimate {
  Family family = Family::Forward;
  double t_hat_c = std::numeric_limits<double>::infinity();
  std::optional<double> origin_star;
  std::optional<double> selection_residual;
  bool accepted = false;
  int admissible_count = 0;
  /// Grid neighbours bracketing the refined minimizer.
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// One entry per admissible grid origin, in grid order.
  std::vector<CriticalTimeResult> per_origin;
};

struct LambdaEstimate {
  double lambda = 0.0;
  double t_hat_c = std::numeric_limits<double>::infinity();
  std::optional<double> alpha_star;
  Family family = Family::Forward;
  double t_c_final = std::numeric_limits<double>::infinity();
  bool accepted = false;
  std::optional<double> selection_residual;
  std::string note;
  FamilyEstimate forward;
  std::optional<FamilyEstimate> backward;  // absent when resolved by symmetry
};

struct EstimateOptions {
  RootScan scan;
  bool refine = true;  // golden-section refinement around the grid minimum
  int threads = 1;
  /// Origins for the backward family; empty means the negated forward grid.
  std::vector<double> backward_grid;
};

/// Bound-carrying evaluator for one profile and one damping value.
class CriticalTimeEstimator {
 public:
  CriticalTimeEstimator(const Profile& profile, Damping damping);

  const Profile& profile() const { return profile_; }
  const Damping& damping() const { return damping_; }
  double delta() const { return delta_; }

  // The following throw std::invalid_argument for inadmissible origins or
  // negative time.
  double eta_envelope(double t, double origin, Family family) const;
  double gamma(double t, double origin, Family family) const;
  double critical_residual(double t, double origin, Family family) const;
  double selection_residual(double t, double origin, Family family) const;

  /// Smallest root of the critical residual in (0, t_scan_max].  Requires
  /// lambda > 0.
  CriticalTimeResult solve(double origin, Family family, const RootScan& scan = {}) const;

  /// lambda -> 0 closed form; nullopt when the limiting gamma vanishes.
  std::optional<double> inviscid_tc(double origin, Family family = Family::Forward) const;

  /// Pre-critical time over a grid of forward origins plus the selection rule.
  /// lambda == 0 uses the inviscid closed form and skips the selection rule.
  LambdaEstimate estimate(std::span<const double> alpha_grid,
                          const EstimateOptions& opts = {}) const;

 private:
  struct OriginData {
    double origin;
    double r0;
    double r0_prime;
    double k0;       // k(2 r0(origin))
    double f0_abs;   // |f(2 r0(origin))|
  };
  OriginData origin_data(double origin) const;
  void require_admissible(double origin, Family family) const;

  double eta_envelope_unchecked(double t, const OriginData& o, Family family) const;
  double residual_unchecked(double t, const OriginData& o, Family family) const;
  double selection_unchecked(double t, const OriginData& o, Family family) const;
  CriticalTimeResult solve_unchecked(const OriginData& o, Family family,
                                     const RootScan& scan) const;
  std::optional<double> inviscid_unchecked(const OriginData& o, Family family) const;
  FamilyEstimate scan_family(std::span<const double> grid, Family family,
                             const EstimateOptions& opts) const;

  const Profile& profile_;
  Damping damping_;
  double delta_;
};

// Free-function forms.
double eta_L_plus(const Profile& p, const Damping& d, double t, double alpha);
double gamma_plus(const Profile& p, const Damping& d, double t, double alpha);
double critical_residual(const Profile& p, const Damping& d, double t, double alpha);
double selection_residual(const Profile& p, const Damping& d, double t, double origin,
                          Family family);
CriticalTimeResult solve_tc_for_alpha(const Profile& p, const Damping& d, double alpha,
                                      double t_scan_max = 200.0);
std::optional<double> inviscid_tc(const Profile& p, double alpha);
LambdaEstimate critical_time_estimate(const Profile& p, const Damping& d,
                                      std::span<const double> alpha_grid,
                                      double t_scan_max = 200.0);

/// Log-spaced origins in [alpha_min, alpha_max].  alpha_max <= 0 selects the
/// point where |r0'(a) r0(a)| drops below 1e-6 of its maximum.
std::vector<double> default_alpha_grid(const Profile& p, int points = 400,
                                       double alpha_min = 1e-3, double alpha_max = 0.0);

/// Linear spacing when alpha_min <= 0, log spacing otherwise.
std::vector<double> make_origin_grid(double alpha_min, double alpha_max, int points);

}  // namespace twistshock
