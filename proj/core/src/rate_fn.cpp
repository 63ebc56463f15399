#include "renege_ldp/rate_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace renege_ldp::rate_fn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(v^2 + 4 lambda mu) without intermediate overflow.  The direct form is
// preferred: it keeps perfect squares exact (v = 1, 4 lambda mu = 8 gives 3
// bit-exactly), which std::hypot does not guarantee.
double discriminant_root(double v, double lambda, double mu) {
  if (std::abs(v) > 1e150) {
    return std::hypot(v, 2.0 * std::sqrt(lambda * mu));
  }
  return std::sqrt(v * v + 4.0 * lambda * mu);
}

// phi1, phi2 = 1/phi1 solving lambda phi1 - mu phi2 = v, picking the
// cancellation-free branch of the quadratic.
void drift_controls(double v, double lambda, double mu, double& phi1, double& phi2) {
  const double s = discriminant_root(v, lambda, mu);
  if (v >= 0.0) {
    phi1 = (s + v) / (2.0 * lambda);
    phi2 = (2.0 * lambda) / (s + v);
  } else {
    phi1 = (2.0 * mu) / (s - v);
    phi2 = (s - v) / (2.0 * mu);
  }
}

// reneging stream cost rate q log(q / (theta x)) - q + theta x for level
// x > 0, written with separated logs so q / (theta x) may not be representable
double reneging_stream_cost(double theta, double x, double q) {
  if (q == 0.0) return theta * x;
  return q * (std::log(q) - std::log(theta * x)) - q + theta * x;
}

void require_slope_domain(double x, double q) {
  if (!(x >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "queue level x must be nonnegative");
  }
  if (!(q >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "reneging slope q must be nonnegative");
  }
}

// service capacity actually in use and the level exposed to reneging; the
// many-server queue serves min(x, 1) server-loads and renegs from the excess
double service_scale(const ModelParams& params, double x) {
  if (params.mode == Mode::SingleServer) return params.mu;
  return params.mu * std::min(x, 1.0);
}

double reneging_level(const ModelParams& params, double x) {
  if (params.mode == Mode::SingleServer) return x;
  return std::max(x - 1.0, 0.0);
}

}  // namespace

double poisson_entropy(double x) {
  if (!(x >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "poisson_entropy needs x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x > 0.5 && x < 2.0) {
    const double d = x - 1.0;
    return x * std::log1p(d) - d;
  }
  return x * std::log(x) - x + 1.0;
}

namespace {

// per-stream split of the instantaneous cost; +inf components mark infeasible
// slope demands instead of throwing so quadrature can report them
CostComponents cost_split(const ModelParams& params, double x, double p, double q) {
  CostComponents split;
  const double level = reneging_level(params, x);
  if (level == 0.0 && q > 0.0) {
    split.reneging = kInf;
    return split;
  }
  const double sv = service_scale(params, x);
  const double v = p + q;
  if (sv == 0.0) {
    // an empty many-server system moves by arrivals alone
    if (v < 0.0) {
      split.arrival = kInf;
      return split;
    }
    split.arrival = params.lambda * poisson_entropy(v / params.lambda);
  } else {
    double phi1 = 1.0;
    double phi2 = 1.0;
    drift_controls(v, params.lambda, sv, phi1, phi2);
    split.arrival = params.lambda * poisson_entropy(phi1);
    split.service = sv * poisson_entropy(phi2);
  }
  if (level > 0.0) split.reneging = reneging_stream_cost(params.theta, level, q);
  return split;
}

}  // namespace

double local_cost(const ModelParams& params, double x, double p, double q) {
  require_slope_domain(x, q);
  return cost_split(params, x, p, q).sum();
}

ControlTriple optimal_controls(const ModelParams& params, double x, double p, double q) {
  require_slope_domain(x, q);
  const double level = reneging_level(params, x);
  if (level == 0.0 && q > 0.0) {
    throw Error(ErrorCode::BoundaryInfeasible,
                "no control renegs without customers past the servers");
  }
  const double sv = service_scale(params, x);
  const double v = p + q;
  ControlTriple c;
  if (sv == 0.0) {
    if (v < 0.0) {
      throw Error(ErrorCode::BoundaryInfeasible,
                  "an empty many-server system cannot move down");
    }
    c.phi1 = v / params.lambda;
    c.phi2 = 1.0;
  } else {
    drift_controls(v, params.lambda, sv, c.phi1, c.phi2);
  }
  c.phi3 = level > 0.0 ? q / (params.theta * level) : 1.0;
  return c;
}

LocalCostDerivs local_cost_derivs(const ModelParams& params, double x, double p, double q) {
  require_slope_domain(x, q);
  if (!(reneging_level(params, x) > 0.0)) {
    throw Error(ErrorCode::BoundaryInfeasible,
                "derivatives are defined above the reneging boundary only");
  }
  const ControlTriple c = optimal_controls(params, x, p, q);
  LocalCostDerivs d;
  d.dx = params.theta * (1.0 - c.phi3);
  d.dp = std::log(c.phi1);
  // at q = 0 the true partial is -inf; the floor keeps it a large finite
  // descent signal so projected-gradient consumers stay in double range
  d.dq = std::log(c.phi1) + std::log(std::max(c.phi3, 1e-300));
  return d;
}

double tilt_root(const ModelParams& params, TargetRate target) {
  const double gamma = target.gamma;
  if (!(gamma >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "target rate gamma must be nonnegative");
  }
  const double s = discriminant_root(gamma, params.lambda, params.mu);
  return (2.0 * params.lambda) / (s + gamma);
}

DecayRateResult decay_rate(const ModelParams& params, TargetRate target) {
  DecayRateResult r;
  r.z_gamma = tilt_root(params, target);
  const double z = r.z_gamma;
  r.c_gamma = params.lambda * (1.0 - 1.0 / z) + params.mu * (1.0 - z) -
              target.gamma * std::log(z);
  return r;
}

namespace {

// cost rate of holding a stationary tilted level: arrivals at mu_star + gamma,
// services at mu_star, the reneging stream tilted to theta_star at level
// gamma / theta_star
double stationary_cost(const ModelParams& params, double gamma, double mu_star,
                       double theta_star) {
  double cost = params.lambda * poisson_entropy((mu_star + gamma) / params.lambda) +
                params.mu * poisson_entropy(mu_star / params.mu);
  if (gamma > 0.0) {
    const double level = gamma / theta_star;
    cost += params.theta * level * poisson_entropy(theta_star / params.theta);
  }
  return cost;
}

template <typename F>
double golden_section(F f, double lo, double hi, int iters) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace

double heuristic_decay_rate(const ModelParams& params, TargetRate target,
                            int grid_resolution, bool search_theta) {
  validate(params, Horizon{1.0}, Purpose::Simulation);
  if (params.lambda < params.mu) {
    throw Error(ErrorCode::LambdaLessThanMu, "the stationary scan needs lambda >= mu");
  }
  const double gamma = target.gamma;
  if (!(gamma >= 0.0)) {
    throw Error(ErrorCode::NegativeArgument, "target rate gamma must be nonnegative");
  }
  if (grid_resolution < 100) {
    throw Error(ErrorCode::GridTooCoarse, "heuristic grid resolution must be >= 100");
  }

  // service-tilt search; the objective is convex in mu_star, so a grid scan
  // plus golden-section refinement around the best cell nails the minimum
  const double hi = 2.0 * (params.lambda + params.mu + gamma);
  const double step = hi / grid_resolution;
  double best = step;
  double best_val = kInf;
  for (int j = 1; j <= grid_resolution; ++j) {
    const double m = j * step;
    const double val = stationary_cost(params, gamma, m, params.theta);
    if (val < best_val) {
      best_val = val;
      best = m;
    }
  }
  const double lo = std::max(best - step, step * 1e-6);
  const double mu_star = golden_section(
      [&](double m) { return stationary_cost(params, gamma, m, params.theta); }, lo,
      best + step, 90);
  double result = stationary_cost(params, gamma, mu_star, params.theta);

  if (search_theta && gamma > 0.0) {
    // widen the search to the reneging tilt; the extra dimension never helps,
    // the optimum sits back at theta_star = theta
    const double lt_lo = std::log(params.theta) - 5.0;
    const double lt_hi = std::log(params.theta) + 5.0;
    const int tn = std::max(grid_resolution / 40, 100);
    double tbest = params.theta;
    double tbest_val = kInf;
    for (int j = 0; j <= tn; ++j) {
      const double th = std::exp(lt_lo + (lt_hi - lt_lo) * j / tn);
      const double val = stationary_cost(params, gamma, mu_star, th);
      if (val < tbest_val) {
        tbest_val = val;
        tbest = th;
      }
    }
    const double tstep = tbest * ((lt_hi - lt_lo) / tn);
    const double theta_star = golden_section(
        [&](double th) { return stationary_cost(params, gamma, mu_star, th); },
        std::max(tbest - tstep, 1e-12), tbest + tstep, 90);
    result = std::min(result, stationary_cost(params, gamma, mu_star, theta_star));
  }
  return result;
}

CostReport path_cost(const ModelParams& params, const Trajectory& traj) {
  const std::size_t m = traj.t.size();
  if (m < 2) {
    throw Error(ErrorCode::GridTooCoarse, "path_cost needs at least two nodes");
  }
  CostReport report;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double dt = traj.t[k + 1] - traj.t[k];
    if (!(dt > 0.0)) {
      throw Error(ErrorCode::ConfigInvalid, "grid must be strictly increasing");
    }
    const double p = (traj.xi[k + 1] - traj.xi[k]) / dt;
    double q = (traj.zeta[k + 1] - traj.zeta[k]) / dt;
    if (q < 0.0) {
      if (q < -1e-9) {
        throw Error(ErrorCode::NegativeArgument, "zeta must be nondecreasing");
      }
      q = 0.0;
    }
    const CostComponents left = cost_split(params, std::max(traj.xi[k], 0.0), p, q);
    const CostComponents right = cost_split(params, std::max(traj.xi[k + 1], 0.0), p, q);
    report.components.arrival += dt * 0.5 * (left.arrival + right.arrival);
    report.components.service += dt * 0.5 * (left.service + right.service);
    report.components.reneging += dt * 0.5 * (left.reneging + right.reneging);
  }
  report.total = report.components.sum();
  report.normalized = report.total / traj.t.back();
  return report;
}

}  // namespace renege_ldp::rate_fn
