#include "renege_ldp/fluid.hpp"

#include <algorithm>
#include <cmath>

namespace renege_ldp::fluid {

ReflectedPath skorohod_map(const std::vector<double>& t, const std::vector<double>& psi) {
  if (psi.empty()) {
    throw Error(ErrorCode::GridTooCoarse, "skorohod_map needs a nonempty input");
  }
  if (t.size() != psi.size()) {
    throw Error(ErrorCode::ConfigInvalid, "time and path arrays must match");
  }
  if (psi.front() < 0.0) {
    throw Error(ErrorCode::NegativeStart, "reflected input must start nonnegative");
  }
  ReflectedPath out;
  out.t = t;
  out.value.resize(psi.size());
  out.pushing.resize(psi.size());
  double running_min = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    running_min = std::min(running_min, psi[k]);
    out.pushing[k] = -running_min;
    out.value[k] = psi[k] - running_min;
  }
  return out;
}

namespace {

// vector field of the scaled dynamics; x is kept in the admissible region by
// the caller
double drift(const ModelParams& params, double x) {
  if (params.mode == Mode::SingleServer) {
    return params.lambda - params.mu - params.theta * x;
  }
  return params.lambda - params.mu * std::min(x, 1.0) -
         params.theta * std::max(x - 1.0, 0.0);
}

double reneging_rate(const ModelParams& params, double x) {
  if (params.mode == Mode::SingleServer) return params.theta * x;
  return params.theta * std::max(x - 1.0, 0.0);
}

}  // namespace

Trajectory lln_trajectory(const ModelParams& params, Horizon horizon, int grid_segments) {
  validate(params, horizon, Purpose::Variational);
  Trajectory traj;
  traj.t = uniform_grid(horizon.T, grid_segments);
  traj.xi.resize(traj.t.size());
  traj.zeta.resize(traj.t.size());
  // many-server reduces to the single-server closed form run from x0 - 1 and
  // shifted back up by one (the busy servers never free up when lambda >= mu)
  const double shift = params.mode == Mode::SingleServer ? 0.0 : 1.0;
  const double start = params.x0 - shift;
  const double level = (params.lambda - params.mu) / params.theta;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const double decay = std::exp(-params.theta * traj.t[k]);
    const double ramp = -std::expm1(-params.theta * traj.t[k]);  // 1 - e^{-theta t}
    traj.xi[k] = shift + decay * start + level * ramp;
    traj.zeta[k] = (params.lambda - params.mu) * traj.t[k] + ramp * (start - level);
  }
  return traj;
}

Trajectory integrate_fluid(const ModelParams& params, Horizon horizon, int grid_segments) {
  validate(params, horizon, Purpose::Simulation);
  Trajectory traj;
  traj.t = uniform_grid(horizon.T, grid_segments);
  traj.xi.resize(traj.t.size());
  traj.zeta.resize(traj.t.size());
  double x = params.x0;
  double y = 0.0;
  traj.xi[0] = x;
  traj.zeta[0] = 0.0;
  const double h = horizon.T / grid_segments;
  for (std::size_t k = 1; k < traj.t.size(); ++k) {
    // classic RK4 on (x, y); the single-server field can point below zero
    // when lambda < mu, so project each stage and the result back to x >= 0
    const auto fx = [&](double xv) { return drift(params, std::max(xv, 0.0)); };
    const auto fy = [&](double xv) { return reneging_rate(params, std::max(xv, 0.0)); };
    const double k1x = fx(x), k1y = fy(x);
    const double k2x = fx(x + 0.5 * h * k1x), k2y = fy(x + 0.5 * h * k1x);
    const double k3x = fx(x + 0.5 * h * k2x), k3y = fy(x + 0.5 * h * k2x);
    const double k4x = fx(x + h * k3x), k4y = fy(x + h * k3x);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    x = std::max(x, 0.0);
    traj.xi[k] = x;
    traj.zeta[k] = y;
  }
  return traj;
}

double zero_cost_rate(const ModelParams& params, Horizon horizon) {
  validate(params, horizon, Purpose::Variational);
  const double shift = params.mode == Mode::SingleServer ? 0.0 : 1.0;
  const double start = params.x0 - shift;
  const double level = (params.lambda - params.mu) / params.theta;
  const double ramp = -std::expm1(-params.theta * horizon.T);
  return (params.lambda - params.mu) + ramp / horizon.T * (start - level);
}

}  // namespace renege_ldp::fluid
