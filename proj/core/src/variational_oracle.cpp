#include "renege_ldp/variational_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "renege_ldp/el_minimizer.hpp"
#include "renege_ldp/fluid.hpp"
#include "renege_ldp/rate_fn.hpp"

namespace renege_ldp::oracle {

namespace {

double node_floor(const DiscreteProblem& problem) {
  const double base = problem.params.mode == Mode::ManyServer ? 1.0 : 0.0;
  return base + problem.floor_x;
}

// left level of segment k; the pinned start is lifted to the floor so the
// first cell stays differentiable when x0 sits on the boundary
double left_level(const DiscreteProblem& problem, const std::vector<double>& xi,
                  std::size_t k) {
  const double raw = k == 0 ? problem.params.x0 : xi[k - 1];
  return std::max(raw, node_floor(problem));
}

void require_shapes(const DiscreteProblem& problem, const std::vector<double>& xi,
                    const std::vector<double>& q) {
  const auto m = static_cast<std::size_t>(problem.segments);
  if (xi.size() != m || q.size() != m) {
    throw Error(ErrorCode::ConfigInvalid, "xi and q must both have one entry per segment");
  }
}

}  // namespace

double discrete_objective(const DiscreteProblem& problem, const std::vector<double>& xi,
                          const std::vector<double>& q) {
  require_shapes(problem, xi, q);
  const double dt = problem.horizon.T / problem.segments;
  double total = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double x = left_level(problem, xi, k);
    const double p = (xi[k] - x) / dt;
    total += dt * rate_fn::local_cost(problem.params, x, p, q[k]);
  }
  return total;
}

void discrete_gradient(const DiscreteProblem& problem, const std::vector<double>& xi,
                       const std::vector<double>& q, std::vector<double>& grad_xi,
                       std::vector<double>& grad_q) {
  require_shapes(problem, xi, q);
  const auto m = xi.size();
  const double dt = problem.horizon.T / problem.segments;
  grad_xi.assign(m, 0.0);
  grad_q.assign(m, 0.0);
  std::vector<rate_fn::LocalCostDerivs> derivs(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = left_level(problem, xi, k);
    const double p = (xi[k] - x) / dt;
    derivs[k] = rate_fn::local_cost_derivs(problem.params, x, p, q[k]);
    grad_q[k] = dt * derivs[k].dq;
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    grad_xi[j] = derivs[j].dp - derivs[j + 1].dp + dt * derivs[j + 1].dx;
  }
  grad_xi[m - 1] = derivs[m - 1].dp;
}

void project_simplex(std::vector<double>& q, double total) {
  if (!(total >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "simplex total must be nonnegative");
  }
  if (q.empty()) {
    throw Error(ErrorCode::GridTooCoarse, "cannot project an empty vector");
  }
  if (total == 0.0) {
    std::fill(q.begin(), q.end(), 0.0);
    return;
  }
  std::vector<double> u = q;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - total) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      rho = j + 1;
      tau = candidate;
    }
  }
  (void)rho;
  for (double& value : q) value = std::max(value - tau, 0.0);
}

namespace {

struct Point {
  std::vector<double> xi;
  std::vector<double> q;
};

void project(const DiscreteProblem& problem, Point& pt, double q_total) {
  const double floor = node_floor(problem);
  for (double& x : pt.xi) x = std::max(x, floor);
  project_simplex(pt.q, q_total);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.xi.size(); ++k) {
    const double dx = a.xi[k] - b.xi[k];
    const double dq = a.q[k] - b.q[k];
    s += dx * dx + dq * dq;
  }
  return s;
}

}  // namespace

OptimizeResult optimize(const DiscreteProblem& problem, int max_iters, double tol) {
  validate(problem.params, problem.horizon, Purpose::Variational);
  if (problem.segments < 10) {
    throw Error(ErrorCode::GridTooCoarse, "the discretization needs at least 10 segments");
  }
  if (!(problem.target.gamma > 0.0)) {
    throw Error(ErrorCode::GammaNonpositive, "the discrete problem needs gamma > 0");
  }
  const auto m = static_cast<std::size_t>(problem.segments);
  const double dt = problem.horizon.T / problem.segments;
  const double q_total = problem.target.gamma * problem.horizon.T / dt;

  // start from the zero-cost path with the reneging budget spread uniformly
  Point x;
  {
    const Trajectory lln =
        fluid::lln_trajectory(problem.params, problem.horizon, problem.segments);
    x.xi.assign(lln.xi.begin() + 1, lln.xi.end());
    x.q.assign(m, q_total / static_cast<double>(m));
    project(problem, x, q_total);
  }

  Point x_prev = x;
  Point y = x;
  Point candidate = x;
  std::vector<double> gx, gq;
  double f_cur = discrete_objective(problem, x.xi, x.q);
  double momentum = 1.0;
  double step = 1.0;

  Diagnostics diag;
  diag.objective = f_cur;
  int calm_streak = 0;
  bool just_restarted = false;

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    discrete_gradient(problem, y.xi, y.q, gx, gq);
    const double f_y = discrete_objective(problem, y.xi, y.q);

    // backtracking on the proximal quadratic model at y
    double f_cand = 0.0;
    int bt = 0;
    for (; bt < 60; ++bt) {
      candidate = y;
      for (std::size_t k = 0; k < m; ++k) {
        candidate.xi[k] -= step * gx[k];
        candidate.q[k] -= step * gq[k];
      }
      project(problem, candidate, q_total);
      f_cand = discrete_objective(problem, candidate.xi, candidate.q);
      double linear = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        linear += gx[k] * (candidate.xi[k] - y.xi[k]) + gq[k] * (candidate.q[k] - y.q[k]);
      }
      const double quad = squared_distance(candidate, y) / (2.0 * step);
      if (f_cand <= f_y + linear + quad + 1e-15 * (1.0 + std::abs(f_y))) break;
      step *= 0.5;
      ++diag.backtracks;
    }

    if (f_cand <= f_cur + 1e-15 * (1.0 + std::abs(f_cur))) {
      // monotone accept with Nesterov extrapolation toward the next probe
      const double rel_dec = (f_cur - f_cand) / std::max(1.0, std::abs(f_cand));
      const double moved = std::sqrt(squared_distance(candidate, x));
      x_prev = x;
      x = candidate;
      f_cur = std::min(f_cur, f_cand);
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double mix = (momentum - 1.0) / next_momentum;
      momentum = next_momentum;
      y = x;
      for (std::size_t k = 0; k < m; ++k) {
        y.xi[k] += mix * (x.xi[k] - x_prev.xi[k]);
        y.q[k] += mix * (x.q[k] - x_prev.q[k]);
      }
      project(problem, y, q_total);
      diag.last_rel_decrease = rel_dec;
      just_restarted = false;
      if (rel_dec < tol && moved < std::sqrt(tol) * (1.0 + std::sqrt(dot(x.xi, x.xi)))) {
        ++calm_streak;
        if (calm_streak >= 10) {
          diag.converged = true;
          ++iter;
          break;
        }
      } else {
        calm_streak = 0;
      }
      step = std::min(step * 2.0, 1.0);
    } else if (!just_restarted) {
      // the extrapolated point overshot; fall back to a plain step from x
      momentum = 1.0;
      y = x;
      just_restarted = true;
    } else {
      // even the plain projected step cannot decrease: numerically stationary
      diag.converged = true;
      ++iter;
      break;
    }
  }

  diag.iterations = iter;
  diag.objective = f_cur;
  {
    discrete_gradient(problem, x.xi, x.q, gx, gq);
    Point probe = x;
    for (std::size_t k = 0; k < m; ++k) {
      probe.xi[k] -= gx[k];
      probe.q[k] -= gq[k];
    }
    project(problem, probe, q_total);
    diag.grad_norm = std::sqrt(squared_distance(probe, x));
  }
  if (!diag.converged) {
    throw Error(ErrorCode::NotConverged,
                "projected gradient hit the iteration cap before the tolerance");
  }

  OptimizeResult result;
  result.diag = diag;
  result.trajectory.t = uniform_grid(problem.horizon.T, problem.segments);
  result.trajectory.xi.resize(m + 1);
  result.trajectory.zeta.resize(m + 1);
  result.trajectory.xi[0] = problem.params.x0;
  result.trajectory.zeta[0] = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    result.trajectory.xi[k + 1] = x.xi[k];
    result.trajectory.zeta[k + 1] = result.trajectory.zeta[k] + dt * x.q[k];
  }
  result.trajectory.controls.emplace();
  auto& controls = *result.trajectory.controls;
  controls.phi1.resize(m + 1);
  controls.phi2.resize(m + 1);
  controls.phi3.resize(m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    // node k+1 carries the controls of the cell ending there
    const double level = left_level(problem, x.xi, k);
    const double p = (x.xi[k] - level) / dt;
    const rate_fn::ControlTriple c =
        rate_fn::optimal_controls(problem.params, level, p, x.q[k]);
    controls.phi1[k + 1] = c.phi1;
    controls.phi2[k + 1] = c.phi2;
    controls.phi3[k + 1] = c.phi3;
  }
  controls.phi1[0] = controls.phi1[1];
  controls.phi2[0] = controls.phi2[1];
  controls.phi3[0] = controls.phi3[1];
  result.cost = rate_fn::path_cost(problem.params, result.trajectory);
  result.cost.decay_rate = rate_fn::decay_rate(problem.params, problem.target).c_gamma;
  return result;
}

std::vector<RefinementRow> refinement_study(const ModelParams& params, Horizon horizon,
                                            TargetRate target, const std::vector<int>& m_list,
                                            int max_iters, double tol) {
  double reference = 0.0;
  if (params.mode == Mode::ManyServer) {
    const el::MultiserverMinimizer reduced =
        el::multiserver_minimizer(params, horizon, target, 1e-12, 256);
    reference = reduced.cost.total;
  } else {
    const el::TiltParameters tilt = el::solve_tilt(params, horizon, target);
    const Trajectory traj = el::build_minimizer(params, horizon, tilt, 256);
    reference = el::minimizer_cost(params, horizon, target, tilt, traj).total;
  }
  std::vector<RefinementRow> rows;
  rows.reserve(m_list.size());
  for (const int m : m_list) {
    DiscreteProblem problem;
    problem.params = params;
    problem.horizon = horizon;
    problem.target = target;
    problem.segments = m;
    const OptimizeResult run = optimize(problem, max_iters, tol);
    rows.push_back(RefinementRow{m, run.diag.objective, run.diag.objective - reference,
                                 run.diag.iterations});
  }
  return rows;
}

}  // namespace renege_ldp::oracle
