#pragma once

#include <cstdint>
#include <optional>

#include "renege_ldp/model.hpp"

namespace renege_ldp::qsim {

struct SimConfig {
  ModelParams params;
  Horizon horizon;
  std::int64_t n = 1;  // scale: queue starts at round(n x0), rates scale with n
  std::uint64_t seed = 1;
  std::int64_t replications = 1;
};

enum class EventType : std::uint8_t { Arrival = 0, Service = 1, Reneging = 2 };

const char* event_name(EventType type);

struct SamplePath {
  std::int64_t n = 1;
  double x0_scaled = 0.0;  // round(n x0)/n, ties to even
  std::vector<double> t;   // jump times, increasing, events at exactly T excluded
  std::vector<double> x_bar;  // scaled queue after each jump
  std::vector<double> y_bar;  // scaled cumulative renegings after each jump
  std::vector<EventType> event;
  double log_lr = 0.0;  // log d(original)/d(tilted) along the path; 0 untilted
  std::int64_t arrivals = 0;
  std::int64_t services = 0;
  std::int64_t renegings = 0;
  double x_bar_T = 0.0;  // state at the horizon
  double y_bar_T = 0.0;
};

// Exact event-driven simulation of the scaled queue.  Single-server rates:
// arrivals lambda n, services mu n while the queue is nonempty, reneging
// theta (Q-1)^+.  Many-server: services mu min(Q, n), reneging theta (Q-n)^+.
// Deterministic given (seed, replication 0).
SamplePath simulate(const SimConfig& config);

// Exact simulation under time-dependent tilted rates (lambda phi1(t),
// mu phi2(t), theta phi3(t) per head) read from the control grid of a
// trajectory, piecewise constant and left continuous between nodes (the cell
// (t_{k-1}, t_k] holds node k's values).  Rates are constant between jumps
// inside a cell, so exponential clocks are simply redrawn at each cell
// boundary; memorylessness keeps that exact, no thinning loss.  log_lr
// accumulates log(original rate / tilted rate) at each jump plus the
// integrated total-rate difference along the realized path, giving the exact
// pathwise likelihood ratio d(original)/d(tilted).  Controls must satisfy
// phi1, phi2 > 0 and phi3 >= 0, else Error(ControlNotPositive).
SamplePath simulate_tilted(const SimConfig& config, const Trajectory& controls);

enum class Direction { AtLeast, AtMost };

struct EstimateReport {
  double p_hat = 0.0;
  double ci95 = 0.0;  // normal-approximation 95% half width
  bool degenerate_ci = false;
  std::optional<double> log_decay;  // -(1/n) log p_hat when p_hat > 0
  std::optional<double> ess;        // (sum w)^2 / sum w^2, importance runs only
  std::int64_t replications = 0;
  std::int64_t hits = 0;
};

// Plain Monte Carlo estimate of P(Ybar(T) >= gamma T) (AtLeast) or <= (AtMost)
// over config.replications independent paths.
EstimateReport estimate_naive(const SimConfig& config, TargetRate target, Direction direction);

// Importance-sampling estimate under the tilted dynamics; weights are
// accumulated in log space so weight scales down to e^{-700} stay exact.
EstimateReport estimate_is(const SimConfig& config, TargetRate target, Direction direction,
                           const Trajectory& controls);

struct SweepRow {
  std::int64_t n;
  double p_hat;
  double log_decay;  // -(1/n) log p_hat
  double ess;
  std::int64_t hits;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double i_star_ref = 0.0;  // closed-form minimizer cost I*_{gamma,T}
  double t_c_gamma = 0.0;   // T C(gamma)
};

// estimate_is across scales n_list with the closed-form references attached
SweepResult decay_sweep(const SimConfig& config, TargetRate target, Direction direction,
                        const std::vector<std::int64_t>& n_list, const Trajectory& controls);

// Deterministic substream key for a replication; estimators derive every
// replication from (seed, replication) so results are schedule independent.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replication);

// RENEGE_LDP_THREADS when set (>= 1), else hardware concurrency
int thread_cap();

}  // namespace renege_ldp::qsim
