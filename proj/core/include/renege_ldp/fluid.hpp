#pragma once

#include "renege_ldp/model.hpp"

namespace renege_ldp::fluid {

struct ReflectedPath {
  std::vector<double> t;
  std::vector<double> value;    // reflected path, >= 0
  std::vector<double> pushing;  // minimal nondecreasing regulator
};

// One-dimensional reflection at zero: value_k = psi_k - min(0, min_{j<=k} psi_j),
// computed in a single forward pass.  Throws Error(NegativeStart) for
// psi[0] < 0 and Error(GridTooCoarse) for an empty input.
ReflectedPath skorohod_map(const std::vector<double>& t, const std::vector<double>& psi);

// Closed-form law-of-large-numbers trajectory of the scaled single-server
// queue (lambda >= mu):
//   xi0(t) = e^{-theta t} x0 + (lambda-mu)/theta (1 - e^{-theta t}),
//   zeta0(t) = (lambda-mu) t + (1 - e^{-theta t})(x0 - (lambda-mu)/theta).
Trajectory lln_trajectory(const ModelParams& params, Horizon horizon, int grid_segments);

// RK4 integration of the fluid dynamics with projection at the boundary.
// Single-server: x' = lambda - mu - theta x reflected at 0, y' = theta x.
// Many-server:   x' = lambda - mu min(x,1) - theta (x-1)^+, y' = theta (x-1)^+
// (no reflection needed).
Trajectory integrate_fluid(const ModelParams& params, Horizon horizon, int grid_segments);

// Reneging rate of the zero-cost path over [0, T]:
//   (lambda-mu) + (1 - e^{-theta T})/T (x0 - (lambda-mu)/theta).
double zero_cost_rate(const ModelParams& params, Horizon horizon);

}  // namespace renege_ldp::fluid
