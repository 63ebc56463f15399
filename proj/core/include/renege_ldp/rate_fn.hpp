#pragma once

#include "renege_ldp/model.hpp"

namespace renege_ldp::rate_fn {

// x log x - x + 1 extended continuously by value 1 at x = 0; the deviation
// cost of running a unit-rate Poisson stream at rate x.  Throws
// Error(NegativeArgument) for x < 0.
double poisson_entropy(double x);

struct ControlTriple {
  double phi1 = 1.0;
  double phi2 = 1.0;
  double phi3 = 1.0;
};

// Minimal instantaneous tilting cost for moving the queue at slope p while
// reneging at slope q >= 0 from level x >= 0.  Returns +inf when x == 0 and
// q > 0 (reneging from an empty queue).
double local_cost(const ModelParams& params, double x, double p, double q);

// The minimizing control triple behind local_cost.  At x == 0 only q == 0 is
// feasible; q > 0 throws Error(BoundaryInfeasible).
ControlTriple optimal_controls(const ModelParams& params, double x, double p, double q);

struct LocalCostDerivs {
  double dx = 0.0;
  double dp = 0.0;
  double dq = 0.0;
};

// Analytic partial derivatives of local_cost for x > 0:
//   dx = theta (1 - phi3),  dp = log phi1,  dq = log(phi1 phi3).
LocalCostDerivs local_cost_derivs(const ModelParams& params, double x, double p, double q);

// Positive root z of lambda / z - mu z = gamma (the stationary tilt level).
double tilt_root(const ModelParams& params, TargetRate target);

struct DecayRateResult {
  double c_gamma = 0.0;
  double z_gamma = 1.0;
};

// Explicit decay rate C(gamma) = lambda (1 - 1/z) + mu (1 - z) - gamma log z.
// theta never enters the computation.
DecayRateResult decay_rate(const ModelParams& params, TargetRate target);

// Independent stationary oracle for decay_rate: minimizes
//   lambda ell(l/lambda) + mu ell(m/mu) + theta y ell(t/theta)
// over tilted rates subject to l = m + t y and t y = gamma, by coarse grid
// scan plus golden-section refinement.  With search_theta the reneging tilt
// is searched too instead of being pinned at theta (same optimum; the
// paradox demonstration).  grid_resolution >= 100.
double heuristic_decay_rate(const ModelParams& params, TargetRate target,
                            int grid_resolution = 20000, bool search_theta = false);

// Trapezoid cost of an arbitrary trajectory: forward-difference slopes per
// segment, local_cost averaged over the segment endpoints.  Components split
// the same quadrature by rate stream.  Throws Error(GridTooCoarse) for fewer
// than two nodes.
CostReport path_cost(const ModelParams& params, const Trajectory& traj);

}  // namespace renege_ldp::rate_fn
