#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "renege_ldp/errors.hpp"

namespace renege_ldp {

enum class Mode { SingleServer, ManyServer };

// what the parameters are about to be used for; variational work needs the
// stable non-degenerate regime, simulation does not
enum class Purpose { Simulation, Variational };

struct ModelParams {
  double lambda = 1.0;  // arrival rate
  double mu = 1.0;      // service rate (per server)
  double theta = 1.0;   // patience rate
  double x0 = 0.0;      // scaled initial queue length
  Mode mode = Mode::SingleServer;
};

struct Horizon {
  double T = 1.0;
};

struct TargetRate {
  double gamma = 0.0;  // reneging throughput per unit time
};

// Checks finiteness and the model-regime constraints; throws Error, returns
// the params unchanged.  Variational use additionally requires lambda >= mu
// and, in many-server mode, x0 >= 1.
ModelParams validate(const ModelParams& params, const Horizon& horizon, Purpose purpose);

struct Controls {
  std::vector<double> phi1;  // arrival tilt
  std::vector<double> phi2;  // service tilt
  std::vector<double> phi3;  // reneging tilt (per customer)
};

// A scaled path (queue level xi, cumulative reneging zeta) sampled on a
// uniform grid, optionally with the control triple at each node.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> xi;
  std::vector<double> zeta;
  std::optional<Controls> controls;

  std::size_t points() const { return t.size(); }
  double horizon() const { return t.empty() ? 0.0 : t.back(); }
};

// Structural invariants: >= 2 nodes, uniform strictly-increasing grid from 0,
// matching array sizes, xi >= 0, zeta nondecreasing from 0 (within slack).
// Throws Error(GridTooCoarse / ConfigInvalid) on violation.
void check_trajectory(const Trajectory& traj, double slope_slack = 1e-9);

struct CostComponents {
  double arrival = 0.0;
  double service = 0.0;
  double reneging = 0.0;

  double sum() const { return arrival + service + reneging; }
};

struct CostReport {
  double total = 0.0;
  double normalized = 0.0;  // total / T
  CostComponents components;
  std::optional<double> decay_rate;  // C(gamma) when a target rate is in play
};

// nodes t_j = j T / segments with the last node pinned to T exactly
std::vector<double> uniform_grid(double T, int segments);

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

}  // namespace renege_ldp
