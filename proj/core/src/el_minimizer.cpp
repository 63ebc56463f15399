#include "renege_ldp/el_minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "renege_ldp/rate_fn.hpp"

namespace renege_ldp::el {

namespace {

// s - 1 + e^{-s} without cancellation for small s
double decay_ramp(double s) {
  if (s < 1e-3) {
    return s * s * (0.5 + s * (-1.0 / 6.0 + s * (1.0 / 24.0 - s / 120.0)));
  }
  return s - 1.0 + std::exp(-s);
}

void require_single_server(const ModelParams& params, const char* who) {
  if (params.mode != Mode::SingleServer) {
    std::ostringstream os;
    os << who << " works on the single-server family; use multiserver_minimizer "
       << "for the shifted many-server problem";
    throw Error(ErrorCode::ConfigInvalid, os.str());
  }
}

struct DefectParts {
  double B = 0.0;
  double log_lambda_cap = 0.0;
  double value = 0.0;  // normalized defect (B - R) / (-log lambda_cap)
};

DefectParts defect_parts(const ModelParams& params, Horizon horizon, TargetRate target,
                         double a) {
  if (!(a < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "shooting variable must satisfy a < 1");
  }
  const double T = horizon.T;
  const double th = params.theta;
  const double eT = std::exp(-th * T);
  const double A = a * eT;
  DefectParts out;
  out.B = 1.0 / (1.0 - a);
  // log of e^{-theta T} (1 - a) / (1 - A); always < 0 for a < 1
  out.log_lambda_cap = -th * T + std::log1p(-a) - std::log1p(-A);
  const double cap = std::exp(out.log_lambda_cap);
  const double c = decay_ramp(th * T);
  const double g = target.gamma * T - params.x0 * (1.0 - cap);
  const double h = out.log_lambda_cap - std::expm1(out.log_lambda_cap);  // <= 0
  const double disc = th * th * g * g - 4.0 * params.lambda * c * params.mu * h;
  const double R = (th * g + std::sqrt(disc)) / (2.0 * params.lambda * c);
  out.value = (out.B - R) / (-out.log_lambda_cap);
  return out;
}

}  // namespace

double tilt_defect(const ModelParams& params, Horizon horizon, TargetRate target, double a) {
  validate(params, horizon, Purpose::Variational);
  require_single_server(params, "tilt_defect");
  return defect_parts(params, horizon, target, a).value;
}

TiltParameters solve_tilt(const ModelParams& params, Horizon horizon, TargetRate target,
                          double tol) {
  validate(params, horizon, Purpose::Variational);
  require_single_server(params, "solve_tilt");
  if (!(target.gamma > 0.0)) {
    throw Error(ErrorCode::GammaNonpositive,
                "the shooting family needs gamma > 0; use zero_reneging_path for gamma = 0");
  }

  const auto defect = [&](double a) { return defect_parts(params, horizon, target, a).value; };

  // the defect is strictly increasing in a and tends to -inf as a -> -inf,
  // so expand the lower end geometrically until the sign flips
  double width = 1e-14;  // 1 - a at the top of the bracket
  double hi = 1.0 - width;
  double f_hi = defect(hi);
  if (!(f_hi > 0.0)) {
    throw Error(ErrorCode::BracketingFailed,
                "defect not positive at a = 1 - 1e-14; target rate is outside the "
                "representable tilt range");
  }
  double lo = hi;
  double f_lo = f_hi;
  bool bracketed = false;
  while (width <= 1e18) {
    lo = 1.0 - width;
    f_lo = defect(lo);
    if (f_lo <= 0.0) {
      bracketed = true;
      break;
    }
    hi = lo;
    f_hi = f_lo;
    width *= 4.0;
  }
  if (!bracketed) {
    throw Error(ErrorCode::BracketingFailed,
                "no sign change down to a = 1 - 1e18; defect never crosses zero");
  }

  TiltParameters tilt;
  tilt.bracket_lo = lo;
  tilt.bracket_hi = hi;
  tilt.wide_bracket = (1.0 - lo) > 1e16;

  // bisection with a damped secant candidate; the damping keeps every step
  // inside the bracket so monotonicity does the convergence proof
  double a_lo = lo, a_hi = hi;
  double g_lo = f_lo, g_hi = f_hi;
  double root = 0.5 * (a_lo + a_hi);
  double f_root = defect(root);
  int iters = 1;
  for (; iters < 200; ++iters) {
    if (std::abs(f_root) <= tol) break;
    if (f_root > 0.0) {
      a_hi = root;
      g_hi = f_root;
    } else {
      a_lo = root;
      g_lo = f_root;
    }
    const double span = a_hi - a_lo;
    if (span <= 4.0 * std::numeric_limits<double>::epsilon() *
                    std::max(1.0, std::max(std::abs(a_lo), std::abs(a_hi)))) {
      break;
    }
    const double mid = 0.5 * (a_lo + a_hi);
    double cand = mid;
    if (g_hi != g_lo) {
      const double sec = a_hi - g_hi * (a_hi - a_lo) / (g_hi - g_lo);
      if (sec > a_lo && sec < a_hi) cand = 0.5 * (sec + mid);
    }
    root = cand;
    f_root = defect(root);
  }

  const DefectParts parts = defect_parts(params, horizon, target, root);
  tilt.a = root;
  tilt.A = root * std::exp(-params.theta * horizon.T);
  tilt.B = parts.B;
  tilt.lambda_cap = std::exp(parts.log_lambda_cap);
  tilt.residual = std::abs(f_root);
  tilt.iterations = iters;
  return tilt;
}

namespace {

struct NodeState {
  double xi = 0.0;
  double zeta = 0.0;
  double xi_dot = 0.0;
  double phi1 = 1.0;
  double phi2 = 1.0;
  double phi3 = 1.0;
};

// closed-form node evaluation of the optimal family; everything is written in
// e^{-theta t}, e^{-theta (T-t)} and log1p so large theta T never overflows
NodeState eval_node(const ModelParams& params, Horizon horizon, const TiltParameters& tilt,
                    double t) {
  const double th = params.theta;
  const double T = horizon.T;
  const double a = tilt.a;
  const double B = tilt.B;
  const double et = std::exp(-th * t);
  const double ett = std::exp(-th * (T - t));
  const double w = 1.0 - a * ett;
  const double d = 1.0 - tilt.A;  // 1 - a e^{-theta T}
  const double ramp = -std::expm1(-th * t);  // 1 - e^{-theta t}

  NodeState node;
  node.phi1 = B * w;
  node.phi2 = 1.0 / node.phi1;
  node.phi3 = 1.0 / w;

  node.xi = params.x0 * et * w / d + (params.lambda * B / th) * ramp * w -
            (params.mu / (th * B)) * ramp / d;

  const double log_cap_t = -th * t + std::log1p(-a * ett) - std::log1p(-tilt.A);
  const double h_t = log_cap_t - std::expm1(log_cap_t);
  node.zeta = (params.lambda * B / th) * decay_ramp(th * t) +
              (params.mu / (th * B)) * h_t + params.x0 * ramp / d;

  node.xi_dot = -th * params.x0 * et / d +
                params.lambda * B * (et * w - ramp * (1.0 - w)) -
                (params.mu / B) * et / d;
  return node;
}

}  // namespace

Trajectory build_minimizer(const ModelParams& params, Horizon horizon,
                           const TiltParameters& tilt, int grid_segments) {
  validate(params, horizon, Purpose::Variational);
  require_single_server(params, "build_minimizer");
  Trajectory traj;
  traj.t = uniform_grid(horizon.T, grid_segments);
  const std::size_t m = traj.t.size();
  traj.xi.resize(m);
  traj.zeta.resize(m);
  traj.controls.emplace();
  traj.controls->phi1.resize(m);
  traj.controls->phi2.resize(m);
  traj.controls->phi3.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const NodeState node = eval_node(params, horizon, tilt, traj.t[k]);
    traj.xi[k] = node.xi;
    traj.zeta[k] = node.zeta;
    traj.controls->phi1[k] = node.phi1;
    traj.controls->phi2[k] = node.phi2;
    traj.controls->phi3[k] = node.phi3;
  }
  // zeta(0) = 0 holds exactly in the closed form; pin against rounding
  traj.zeta[0] = 0.0;
  return traj;
}

CostReport minimizer_cost(const ModelParams& params, Horizon horizon, TargetRate target,
                          const TiltParameters& tilt, const Trajectory& traj) {
  validate(params, horizon, Purpose::Variational);
  require_single_server(params, "minimizer_cost");
  const double T = horizon.T;
  const double th = params.theta;
  const double a = tilt.a;
  const double B = tilt.B;
  const double log_b = -std::log1p(-a);
  const double log_cap = -th * T + std::log1p(-a) - std::log1p(-tilt.A);
  const double ramp_T = -std::expm1(-th * T);

  // closed-form total; the integrals of the control family collapse to logs
  const double total = (target.gamma * T - params.x0) * log_b -
                       params.x0 * std::log1p(-tilt.A) +
                       (params.lambda + params.mu) * T -
                       (params.lambda * B / th) * (th * T - a * ramp_T) +
                       (params.mu / (B * th)) * log_cap;

  CostReport report = rate_fn::path_cost(params, traj);
  report.total = total;
  report.normalized = total / T;
  report.decay_rate = rate_fn::decay_rate(params, target).c_gamma;
  return report;
}

OptimalityReport check_optimality(const ModelParams& params, Horizon horizon,
                                  const TiltParameters& tilt, const Trajectory& traj) {
  OptimalityReport report;
  const std::size_t m = traj.points();
  const auto push = [&](OptimalityCheck check) {
    if (!check.passed && !check.skipped) report.all_passed = false;
    report.checks.push_back(std::move(check));
  };

  {
    OptimalityCheck c;
    c.name = "interior_positivity";
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < m; ++k) lo = std::min(lo, traj.xi[k]);
    c.value = lo;
    c.passed = lo > 0.0;
    c.detail = "min xi over (0, T]";
    push(std::move(c));
  }

  {
    OptimalityCheck c;
    c.name = "level_bound";
    if (params.x0 > 0.0) {
      // refine 4x between nodes with the closed form to catch dips the grid
      // cannot see
      const int fine = 4 * static_cast<int>(m - 1);
      double lo = std::numeric_limits<double>::infinity();
      for (int j = 0; j <= fine; ++j) {
        const double t = horizon.T * j / fine;
        lo = std::min(lo, eval_node(params, horizon, tilt, t).xi);
      }
      c.value = lo;
      c.passed = lo > 0.0;
      c.detail = "min xi on a 4x refined grid";
    } else {
      c.skipped = true;
      c.detail = "x0 = 0 starts on the boundary";
    }
    push(std::move(c));
  }

  {
    OptimalityCheck c;
    c.name = "conjugate_controls";
    double worst = 0.0;
    if (traj.controls) {
      for (std::size_t k = 0; k < m; ++k) {
        worst = std::max(worst,
                         std::abs(traj.controls->phi1[k] * traj.controls->phi2[k] - 1.0));
      }
      c.passed = worst <= 1e-12;
    } else {
      c.skipped = true;
      c.detail = "no controls attached";
    }
    c.value = worst;
    if (c.detail.empty()) c.detail = "max |phi1 phi2 - 1|";
    push(std::move(c));
  }

  {
    OptimalityCheck c;
    c.name = "free_endpoint";
    const double phi1_T = tilt.B * (1.0 - tilt.a);
    c.value = std::abs(phi1_T - 1.0);
    c.passed = c.value <= 1e-12;
    c.detail = "|phi1(T) - 1|";
    push(std::move(c));
  }

  {
    OptimalityCheck c;
    c.name = "flow_identity";
    double worst = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const NodeState node = eval_node(params, horizon, tilt, traj.t[k]);
      const double rhs = params.lambda * node.phi1 - params.mu * node.phi2 -
                         params.theta * node.phi3 * node.xi;
      const double scale = 1.0 + std::abs(node.xi_dot);
      worst = std::max(worst, std::abs(node.xi_dot - rhs) / scale);
    }
    c.value = worst;
    c.passed = worst <= 1e-9;
    c.detail = "max relative residual of xi' = lambda phi1 - mu phi2 - theta phi3 xi";
    push(std::move(c));
  }

  return report;
}

OptimalityReport verify_optimality(const ModelParams& params, Horizon horizon,
                                   const TiltParameters& tilt, const Trajectory& traj) {
  OptimalityReport report = check_optimality(params, horizon, tilt, traj);
  if (!report.all_passed) {
    std::ostringstream os;
    os << "optimality diagnostics failed:";
    for (const auto& c : report.checks) {
      if (!c.passed && !c.skipped) os << ' ' << c.name << " (value " << c.value << ")";
    }
    throw Error(ErrorCode::OptimalityViolated, os.str());
  }
  return report;
}

std::pair<Trajectory, CostReport> zero_reneging_path(const ModelParams& params,
                                                     Horizon horizon, int grid_segments) {
  validate(params, horizon, Purpose::Variational);
  require_single_server(params, "zero_reneging_path");
  if (!(horizon.T > params.x0)) {
    throw Error(ErrorCode::HorizonTooShort,
                "the drain-then-sit path needs T > x0 to empty the queue");
  }
  Trajectory traj;
  traj.t = uniform_grid(horizon.T, grid_segments);
  const std::size_t m = traj.t.size();
  traj.xi.resize(m);
  traj.zeta.assign(m, 0.0);
  traj.controls.emplace();
  traj.controls->phi1.resize(m);
  traj.controls->phi2.resize(m);
  traj.controls->phi3.resize(m);

  // drain leg: unit downward slope with reneging suppressed
  const rate_fn::ControlTriple drain =
      params.x0 > 0.0 ? rate_fn::optimal_controls(params, params.x0, -1.0, 0.0)
                      : rate_fn::ControlTriple{};
  // sitting leg: hold the empty queue
  const rate_fn::ControlTriple sit = rate_fn::optimal_controls(params, 0.0, 0.0, 0.0);

  for (std::size_t k = 0; k < m; ++k) {
    const double t = traj.t[k];
    traj.xi[k] = std::max(params.x0 - t, 0.0);
    const bool draining = params.x0 > 0.0 && t <= params.x0;
    const rate_fn::ControlTriple& c = draining ? drain : sit;
    traj.controls->phi1[k] = c.phi1;
    traj.controls->phi2[k] = c.phi2;
    traj.controls->phi3[k] = c.phi3;
  }

  CostReport report = rate_fn::path_cost(params, traj);
  report.decay_rate = rate_fn::decay_rate(params, TargetRate{0.0}).c_gamma;
  return {std::move(traj), std::move(report)};
}

MultiserverMinimizer multiserver_minimizer(const ModelParams& params, Horizon horizon,
                                           TargetRate target, double tol, int grid_segments) {
  if (params.mode != Mode::ManyServer) {
    throw Error(ErrorCode::ConfigInvalid, "multiserver_minimizer needs many-server mode");
  }
  validate(params, horizon, Purpose::Variational);

  // solve the reduced single-server problem from x0 - 1 and lift the queue
  // level back up by the one server-load unit
  ModelParams reduced = params;
  reduced.mode = Mode::SingleServer;
  reduced.x0 = params.x0 - 1.0;

  MultiserverMinimizer out;
  out.tilt = solve_tilt(reduced, horizon, target, tol);
  out.trajectory = build_minimizer(reduced, horizon, out.tilt, grid_segments);
  out.cost = minimizer_cost(reduced, horizon, target, out.tilt, out.trajectory);
  for (double& x : out.trajectory.xi) x += 1.0;
  return out;
}

}  // namespace renege_ldp::el
