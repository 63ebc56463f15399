#pragma once

#include <string>
#include <utility>
#include <vector>

#include "renege_ldp/model.hpp"

namespace renege_ldp::el {

// Shooting parameters of the optimal control family
//   phi1(t) = B (1 - a e^{-theta (T-t)}),  phi2 = 1/phi1,
//   phi3(t) = 1 / (1 - a e^{-theta (T-t)}),
// in the stabilized variable a < 1 (nothing ever exponentiates +theta T, so
// horizons with theta T in the hundreds stay finite).
struct TiltParameters {
  double a = 0.0;           // stabilized shooting variable
  double A = 0.0;           // a e^{-theta T}; underflows to 0 for huge theta T
  double B = 1.0;           // terminal tilt level, B (1 - a) = 1
  double lambda_cap = 0.0;  // boundary factor e^{-theta T}(1-a)/(1-a e^{-theta T})
  double residual = 0.0;    // |defect| at the accepted root
  int iterations = 0;
  double bracket_lo = 0.0;  // sign-change certificate
  double bracket_hi = 0.0;
  bool wide_bracket = false;  // bracket magnitude exceeded 1e16 (gamma near 0)
};

// Monotone-increasing shooting defect in a whose unique zero enforces the
// terminal reneging constraint zeta(T) = gamma T.  Exposed for diagnostics
// and property tests.
double tilt_defect(const ModelParams& params, Horizon horizon, TargetRate target, double a);

// Root-find the defect by geometric bracket expansion downward from a = 1
// plus a safeguarded bisection/secant hybrid.  Throws GammaNonpositive for
// gamma <= 0 and BracketingFailed when no sign change exists in range.
TiltParameters solve_tilt(const ModelParams& params, Horizon horizon, TargetRate target,
                          double tol = 1e-12);

// Sample the optimal trajectory, its cumulative reneging and the control
// triple on a uniform grid of grid_segments segments.
Trajectory build_minimizer(const ModelParams& params, Horizon horizon,
                           const TiltParameters& tilt, int grid_segments);

// Closed-form total cost of the minimizer; the per-component split is
// recomputed by trapezoid quadrature on traj and decay_rate is attached.
CostReport minimizer_cost(const ModelParams& params, Horizon horizon, TargetRate target,
                          const TiltParameters& tilt, const Trajectory& traj);

struct OptimalityCheck {
  std::string name;
  bool passed = false;
  bool skipped = false;
  double value = 0.0;  // measured magnitude backing the verdict
  std::string detail;
};

struct OptimalityReport {
  std::vector<OptimalityCheck> checks;
  bool all_passed = true;
};

// First-order optimality diagnostics on a built minimizer:
//   (i) interior positivity of xi on (0, T],
//  (ii) slope/level bounds for x0 > 0 (skipped at x0 = 0),
// (iii) phi1 phi2 = 1 pointwise,
//  (iv) free-endpoint condition phi1(T) = 1,
//   (v) flow identities against analytic derivatives.
OptimalityReport check_optimality(const ModelParams& params, Horizon horizon,
                                  const TiltParameters& tilt, const Trajectory& traj);

// Same checks; throws Error(OptimalityViolated) naming every failed check
// (either the horizon is below the regime where the family is the minimizer,
// or a numerics bug).
OptimalityReport verify_optimality(const ModelParams& params, Horizon horizon,
                                   const TiltParameters& tilt, const Trajectory& traj);

// Piecewise path for target gamma = 0: drain at unit rate to the boundary
// with reneging suppressed, then sit at zero.  Requires T > x0, else
// Error(HorizonTooShort).  Normalized cost tends to C(0) as T grows.
std::pair<Trajectory, CostReport> zero_reneging_path(const ModelParams& params,
                                                     Horizon horizon, int grid_segments);

struct MultiserverMinimizer {
  TiltParameters tilt;
  Trajectory trajectory;
  CostReport cost;
};

// Many-server minimizer via the shift reduction: solve the single-server
// problem started from x0 - 1 and raise the trajectory by one server-load
// unit.  Requires x0 >= 1 (validated), same decay rate.
MultiserverMinimizer multiserver_minimizer(const ModelParams& params, Horizon horizon,
                                           TargetRate target, double tol, int grid_segments);

}  // namespace renege_ldp::el
