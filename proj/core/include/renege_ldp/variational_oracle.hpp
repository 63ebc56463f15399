#pragma once

#include <vector>

#include "renege_ldp/model.hpp"

namespace renege_ldp::oracle {

// Direct discretization of the rate functional on m uniform segments:
// minimize  sum_k dt L(xi_k, (xi_{k+1}-xi_k)/dt, q_k)
// over node values xi_1..xi_m >= floor_x (xi_0 pinned at x0) and segment
// reneging slopes q_k >= 0 with dt sum q = gamma T.  Entirely independent of
// the shooting solver; used to cross-check it.
struct DiscreteProblem {
  ModelParams params;
  Horizon horizon;
  TargetRate target;
  int segments = 0;      // m >= 10
  double floor_x = 1e-8;
};

struct Diagnostics {
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double grad_norm = 0.0;
  double last_rel_decrease = 0.0;
  int backtracks = 0;
};

struct OptimizeResult {
  Trajectory trajectory;  // controls filled from the optimal slopes
  CostReport cost;        // trapezoid cost of the discrete trajectory
  Diagnostics diag;
};

// Projected-gradient minimization (Nesterov momentum with a monotone
// safeguard, Armijo 0.5 backtracking from unit step) initialized at the LLN
// trajectory with slopes shifted to meet the reneging constraint.  Throws
// Error(GridTooCoarse) for m < 10, Error(GammaNonpositive) for gamma <= 0 and
// Error(NotConverged) when the iteration cap is hit before the tolerance.
OptimizeResult optimize(const DiscreteProblem& problem, int max_iters = 60000,
                        double tol = 1e-10);

struct RefinementRow {
  int segments;
  double objective;
  double gap;  // objective - closed-form minimizer cost
  int iterations;
};

// optimize() across m_list with the gap to the closed-form cost tabulated
std::vector<RefinementRow> refinement_study(const ModelParams& params, Horizon horizon,
                                            TargetRate target, const std::vector<int>& m_list,
                                            int max_iters = 60000, double tol = 1e-10);

// Discrete functional and its analytic gradient; exposed for tests.
// xi has m entries (nodes 1..m), q has m entries (segments), xi_0 = x0.
double discrete_objective(const DiscreteProblem& problem, const std::vector<double>& xi,
                          const std::vector<double>& q);
void discrete_gradient(const DiscreteProblem& problem, const std::vector<double>& xi,
                       const std::vector<double>& q, std::vector<double>& grad_xi,
                       std::vector<double>& grad_q);

// Euclidean projection onto the scaled simplex {q >= 0, sum q = total}
void project_simplex(std::vector<double>& q, double total);

}  // namespace renege_ldp::oracle
