// Initial twist data and the Riemann datum r0 = -L(w0') they induce.
#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace twistshock {

/// Characteristic family: forward curves move with +k, backward with -k.
enum class Family { Forward, Backward };

std::string_view to_string(Family f);

/// Initial twist profile w0 together with the derived Riemann datum.
///
/// Implementations must be immutable after construction; every query is a
/// pure function of its argument.  The companion l0 = -r0 is implicit.
class Profile {
 public:
  virtual ~Profile() = default;

  virtual double w0(double x) const = 0;
  virtual double w0_prime(double x) const = 0;
  /// r0(x) = -L(w0'(x)).
  virtual double r0(double x) const;
  virtual double r0_prime(double x) const = 0;

  virtual double r0_limit_plus() const = 0;
  virtual double r0_limit_minus() const = 0;
  virtual double sup_norm_r0() const = 0;

  /// True when r0(-x) == r0(x) holds exactly, so backward characteristics
  /// mirror forward ones.
  virtual bool r0_is_even() const { return false; }

  /// Sign of r0' over the tail [from, +inf) (forward) or (-inf, from]
  /// (backward) when known in closed form: +1 or -1 if strictly signed, 0 if
  /// r0' vanishes or changes sign there.  nullopt means "unknown, sample it".
  virtual std::optional<int> r0_prime_tail_sign(double from, Family family) const;

  /// Interval on which the profile carries data.  Sampled tail checks stay
  /// inside it; beyond it only the supplied limits are known.
  virtual std::pair<double, double> data_range() const;
};

/// Kink w0(x) = -(2 kappa / pi) arctan(x / zeta).
class KinkProfile final : public Profile {
 public:
  KinkProfile(double kappa, double zeta);

  double kappa() const { return kappa_; }
  double zeta() const { return zeta_; }

  /// xi(x) = 2 kappa zeta / (pi (x^2 + zeta^2)) = -w0'(x).
  double xi(double x) const;

  double w0(double x) const override;
  double w0_prime(double x) const override;
  double r0(double x) const override;
  double r0_prime(double x) const override;
  double r0_limit_plus() const override { return 0.0; }
  double r0_limit_minus() const override { return 0.0; }
  double sup_norm_r0() const override;
  bool r0_is_even() const override { return true; }
  std::optional<int> r0_prime_tail_sign(double from, Family family) const override;

 private:
  double kappa_;
  double zeta_;
};

/// Closed-form profile supplied as callables for w0, w0' and w0''.
/// The limits of w0' at +-infinity must be given; the sup-norm of r0 is
/// found by a bracket scan at construction.
class FunctionProfile final : public Profile {
 public:
  struct Callables {
    std::function<double(double)> w0;
    std::function<double(double)> w0_prime;
    std::function<double(double)> w0_second;
  };
  FunctionProfile(Callables fns, double w0_prime_minus_inf, double w0_prime_plus_inf,
                  bool even_r0 = false);

  double w0(double x) const override { return fns_.w0(x); }
  double w0_prime(double x) const override { return fns_.w0_prime(x); }
  double r0_prime(double x) const override;
  double r0_limit_plus() const override { return r0_plus_; }
  double r0_limit_minus() const override { return r0_minus_; }
  double sup_norm_r0() const override { return sup_norm_; }
  bool r0_is_even() const override { return even_; }

 private:
  Callables fns_;
  double r0_plus_;
  double r0_minus_;
  double sup_norm_;
  bool even_;
};

/// Profile tabulated on strictly increasing abscissae.  w0 is interpolated by
/// cubic Hermite polynomials using the tabulated slopes, w0' linearly.
/// Outside the table w0' is held at its end values.  Limits of r0 at
/// +-infinity are user supplied.
class TabulatedProfile final : public Profile {
 public:
  TabulatedProfile(std::vector<double> x, std::vector<double> w0, std::vector<double> w0_prime,
                   double r0_minus_inf, double r0_plus_inf);

  double w0(double x) const override;
  double w0_prime(double x) const override;
  double r0_prime(double x) const override;
  double r0_limit_plus() const override { return r0_plus_; }
  double r0_limit_minus() const override { return r0_minus_; }
  double sup_norm_r0() const override { return sup_norm_; }
  std::pair<double, double> data_range() const override { return {x_.front(), x_.back()}; }

 private:
  std::size_t cell(double x) const;

  std::vector<double> x_;
  std::vector<double> w_;
  std::vector<double> wp_;
  double r0_minus_;
  double r0_plus_;
  double sup_norm_;
};

/// Coarse scan plus golden-section refinement of sup |r0|.  Approximate for
/// adversarial profiles whose maximum hides between scan points.
struct SupNormScan {
  double lo = -1e3;
  double hi = 1e3;
  int points = 100000;
};
double scan_sup_norm_r0(const Profile& p, const SupNormScan& scan = {});

/// Golden-section maximization of g on [a, b] to absolute tolerance tol in x.
/// Returns the maximizer.
double golden_section_max(const std::function<double(double)>& g, double a, double b,
                          double tol = 1e-12);

/// delta = k(2 ||r0||_inf): global bound on the characteristic speed.
double delta_bound(const Profile& p);

enum class CheckPath { Analytic, Sampled };
std::string_view to_string(CheckPath p);

struct TailSampling {
  int points = 10000;
  double span = 1e3;
};

struct Admissibility {
  bool admissible = false;
  CheckPath path = CheckPath::Analytic;
};

/// Sign conditions an origin must satisfy for the envelope and critical-time
/// estimates along its characteristic.  Forward (origin alpha):
///   sgn(r0'(a)(r0(a) + r0(+inf))) = -1,
///   sgn(r0'(x) r0(a)) = -1 for every x >= a,
///   sgn(r0(a) r0(+inf)) = +1 or r0(+inf) = 0.
/// Backward (origin beta) mirrors these with +1 signs on x <= beta.
Admissibility check_admissible(const Profile& p, double origin, Family family,
                               const TailSampling& sampling = {});

bool admissible_forward(const Profile& p, double alpha);
bool admissible_backward(const Profile& p, double beta);

/// Sign function returning -1, 0 or +1.
int sgn(double v);

}  // namespace twistshock
