// Closed-form scalar nonlinearities of the diagonalized twist-wave system.
//
// The dimensionless twist equation  w_tt - Q(w_x)^2 w_xx = -lambda w_t  is
// diagonalized by the Riemann functions r = w_t - L(w_x), l = w_t + L(w_x),
// with L' = Q and L(0) = 0.  Everything downstream is expressed through the
// difference eta = r - l, so the kernels below are all functions of eta:
//
//   u1(eta) = L^{-1}(-eta/2)       slope recovered from the Riemann difference
//   k(eta)  = Q(u1(eta))           characteristic speed
//   f(eta)  = k'(eta)/sqrt(k(eta)) Riccati coefficient along characteristics
//   H(eta)  = int_0^eta k^{-1/2}   weight used by the selection rule
#pragma once

namespace twistshock {

/// Dimensionless rotational damping.  lambda == 0 is the inviscid limit.
struct Damping {
  double lambda = 0.0;

  explicit Damping(double lam);
  Damping() = default;
};

/// Dimensional material parameters entering the rescaling of the twist
/// equation.  All strictly positive.
struct PhysicalParams {
  double a = 1.0;       // quartic-twist length
  double gamma1 = 1.0;  // rotational viscosity
  double sigma = 1.0;   // moment-of-inertia density
  double K22 = 1.0;     // twist modulus
};

struct Nondimensional {
  Damping damping;
  double tau = 0.0;  // characteristic time
};

/// Q(xi) = sqrt(1 + xi^2).  Throws std::invalid_argument on non-finite input.
double wave_speed(double xi);

/// L(u) = (u sqrt(1+u^2) + asinh u) / 2, the odd primitive of Q with L(0) = 0.
double primitive_L(double u);

/// Inverse of primitive_L to 1e-12 relative accuracy.
///
/// Safeguarded Newton: the iterate is kept inside a bracket that shrinks on
/// every residual evaluation and a bisection step is taken whenever Newton
/// would leave it.  Throws std::runtime_error if the iteration budget is
/// exhausted, which indicates a defect rather than a user error.
double inverse_L(double y);

/// u1(eta) = L^{-1}(-eta/2).  Odd, strictly decreasing, du1/deta = -1/(2k).
double u1_of_eta(double eta);

/// k(eta) = Q(u1(eta)) >= 1, even, k(0) = 1.
double k_of_eta(double eta);

/// f(eta) = k'(eta)/sqrt(k(eta)), evaluated in the parametric form
/// f = -(u/2)(1+u^2)^{-5/4} with u = u1(eta).  Odd with f(eta)*eta > 0 for
/// eta != 0; |f| peaks at u = -/+sqrt(2/3).
double f_of_eta(double eta);

/// H(eta) with H' = 1/sqrt(k) and H(0) = 0.
///
/// Integrated in the slope variable, H(eta) = -2 int_0^{u1(eta)} Q(u)^{1/2} du,
/// which has a smooth integrand; adaptive Gauss-Kronrod to 1e-10 absolute.
double selection_weight_H(double eta);

/// Location eta0 > 0 and value f0 of the positive extremum of f, from the
/// closed form at u = -sqrt(2/3).
struct FExtremum {
  double eta0;
  double f0;
};
FExtremum f_extremum();

/// A(t) = exp(lambda t / 2).  Throws on negative t.
double amplification(const Damping& d, double t);

/// Rescale lengths to sqrt(3) a and times to tau = sqrt(3) a sqrt(sigma/K22);
/// lambda = a gamma1 sqrt(3/(sigma K22)).
Nondimensional nondimensionalize(const PhysicalParams& p);

}  // namespace twistshock
