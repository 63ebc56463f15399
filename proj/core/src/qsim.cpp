#include "renege_ldp/qsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>

#include "renege_ldp/el_minimizer.hpp"
#include "renege_ldp/rate_fn.hpp"

namespace renege_ldp::qsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// uniform on (0, 1]: 53 random bits shifted away from zero, so -log stays finite
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

struct Terminal {
  std::int64_t q = 0;
  std::int64_t y = 0;
  double log_lr = 0.0;
  std::int64_t arrivals = 0;
  std::int64_t services = 0;
  std::int64_t renegings = 0;
};

void require_scale(const SimConfig& config) {
  validate(config.params, config.horizon, Purpose::Simulation);
  if (config.n < 1) {
    throw Error(ErrorCode::ConfigInvalid, "scale n must be at least 1");
  }
}

const Controls& checked_controls(const SimConfig& config, const Trajectory& grid) {
  if (!grid.controls) {
    throw Error(ErrorCode::ConfigInvalid, "tilted simulation needs a control grid");
  }
  if (grid.t.size() < 2 || grid.t.size() != grid.controls->phi1.size() ||
      grid.t.size() != grid.controls->phi2.size() ||
      grid.t.size() != grid.controls->phi3.size()) {
    throw Error(ErrorCode::ConfigInvalid, "control grid arrays must match the time grid");
  }
  if (grid.t.back() < config.horizon.T) {
    throw Error(ErrorCode::ConfigInvalid, "control grid must cover the horizon");
  }
  for (std::size_t k = 0; k < grid.t.size(); ++k) {
    if (!(grid.controls->phi1[k] > 0.0) || !(grid.controls->phi2[k] > 0.0) ||
        !(grid.controls->phi3[k] >= 0.0)) {
      throw Error(ErrorCode::ControlNotPositive,
                  "tilted rates need phi1, phi2 > 0 and phi3 >= 0 at every node");
    }
  }
  return *grid.controls;
}

// one exact path; when tilt is null the original dynamics run and log_lr
// stays exactly zero
Terminal run_path(const SimConfig& config, std::mt19937_64& rng, const Trajectory* tilt,
                  SamplePath* record) {
  const ModelParams& params = config.params;
  const bool single = params.mode == Mode::SingleServer;
  const double T = config.horizon.T;
  const auto n = config.n;
  const double n_d = static_cast<double>(n);
  const double inv_n = 1.0 / n_d;

  Terminal state;
  state.q = std::llrint(n_d * params.x0);

  double t_cur = 0.0;
  std::size_t cell = 1;

  while (true) {
    double phi1 = 1.0, phi2 = 1.0, phi3 = 1.0;
    double cell_end = T;
    if (tilt) {
      while (cell + 1 < tilt->t.size() && tilt->t[cell] <= t_cur) ++cell;
      phi1 = tilt->controls->phi1[cell];
      phi2 = tilt->controls->phi2[cell];
      phi3 = tilt->controls->phi3[cell];
      cell_end = std::min(tilt->t[cell], T);
    }

    const double busy = single ? (state.q > 0 ? n_d : 0.0)
                               : static_cast<double>(std::min(state.q, n));
    const double excess = static_cast<double>(
        std::max(state.q - (single ? std::int64_t{1} : n), std::int64_t{0}));
    const double a_orig = params.lambda * n_d;
    const double s_orig = params.mu * busy;
    const double r_orig = params.theta * excess;
    const double a_tilt = a_orig * phi1;
    const double s_tilt = s_orig * phi2;
    const double r_tilt = r_orig * phi3;
    const double total_tilt = a_tilt + s_tilt + r_tilt;
    const double total_orig = a_orig + s_orig + r_orig;

    double t_next = cell_end;
    if (total_tilt > 0.0) {
      t_next = t_cur - std::log(uniform01(rng)) / total_tilt;
    }
    if (t_next >= cell_end) {
      // no jump before the cell boundary (events at exactly T excluded);
      // charge the likelihood integral for the quiet stretch and redraw
      state.log_lr += (total_tilt - total_orig) * (cell_end - t_cur);
      t_cur = cell_end;
      if (t_cur >= T) break;
      continue;
    }

    state.log_lr += (total_tilt - total_orig) * (t_next - t_cur);
    t_cur = t_next;
    const double u = uniform01(rng) * total_tilt;
    EventType ev;
    if (u <= a_tilt || (s_tilt == 0.0 && r_tilt == 0.0)) {
      ev = EventType::Arrival;
      ++state.q;
      ++state.arrivals;
      state.log_lr -= std::log(phi1);
    } else if (u <= a_tilt + s_tilt || r_tilt == 0.0) {
      ev = EventType::Service;
      --state.q;
      ++state.services;
      state.log_lr -= std::log(phi2);
    } else {
      ev = EventType::Reneging;
      --state.q;
      ++state.y;
      ++state.renegings;
      state.log_lr -= std::log(phi3);
    }
    if (record) {
      record->t.push_back(t_cur);
      record->x_bar.push_back(static_cast<double>(state.q) * inv_n);
      record->y_bar.push_back(static_cast<double>(state.y) * inv_n);
      record->event.push_back(ev);
    }
  }
  return state;
}

SamplePath record_path(const SimConfig& config, const Trajectory* tilt) {
  SamplePath path;
  path.n = config.n;
  const double n_d = static_cast<double>(config.n);
  path.x0_scaled = static_cast<double>(std::llrint(n_d * config.params.x0)) / n_d;
  const double expected =
      (config.params.lambda + config.params.mu) * n_d * config.horizon.T;
  if (expected < 1e7) {
    const auto guess = static_cast<std::size_t>(expected * 1.5 + 16.0);
    path.t.reserve(guess);
    path.x_bar.reserve(guess);
    path.y_bar.reserve(guess);
    path.event.reserve(guess);
  }
  std::mt19937_64 rng(stream_seed(config.seed, 0));
  const Terminal state = run_path(config, rng, tilt, &path);
  path.log_lr = state.log_lr;
  path.arrivals = state.arrivals;
  path.services = state.services;
  path.renegings = state.renegings;
  path.x_bar_T = static_cast<double>(state.q) / n_d;
  path.y_bar_T = static_cast<double>(state.y) / n_d;
  return path;
}

bool event_hit(double y_bar_T, double threshold, Direction direction) {
  return direction == Direction::AtLeast ? y_bar_T >= threshold : y_bar_T <= threshold;
}

// log-sum-exp accumulator merged in deterministic chunk order
struct LogSum {
  double max_log = kNegInf;
  double scaled = 0.0;  // sum of exp(log w - max_log)

  void add(double log_w) {
    if (log_w == kNegInf) return;
    if (log_w > max_log) {
      scaled = scaled * std::exp(max_log - log_w) + 1.0;
      max_log = log_w;
    } else {
      scaled += std::exp(log_w - max_log);
    }
  }

  void merge(const LogSum& other) {
    if (other.max_log == kNegInf) return;
    if (max_log == kNegInf) {
      *this = other;
      return;
    }
    if (other.max_log > max_log) {
      scaled = scaled * std::exp(max_log - other.max_log) + other.scaled;
      max_log = other.max_log;
    } else {
      scaled += other.scaled * std::exp(other.max_log - max_log);
    }
  }

  bool empty() const { return max_log == kNegInf || scaled <= 0.0; }
  double log_value() const { return max_log + std::log(scaled); }
};

struct ChunkStats {
  std::int64_t hits = 0;
  LogSum weight;          // sum of hit weights
  LogSum weight_squared;  // sum of squared hit weights

  void merge(const ChunkStats& other) {
    hits += other.hits;
    weight.merge(other.weight);
    weight_squared.merge(other.weight_squared);
  }
};

constexpr std::int64_t kChunk = 1024;

// runs per_rep over all replications in fixed chunks of 1024 and merges the
// per-chunk partials in index order, so the result never depends on how many
// worker threads ran
template <typename PerRep>
ChunkStats run_replications(std::int64_t replications, PerRep per_rep) {
  if (replications < 1) {
    throw Error(ErrorCode::ConfigInvalid, "need at least one replication");
  }
  const std::int64_t chunks = (replications + kChunk - 1) / kChunk;
  std::vector<ChunkStats> partial(static_cast<std::size_t>(chunks));

  const auto run_chunk = [&](std::int64_t c) {
    ChunkStats stats;
    const std::int64_t lo = c * kChunk;
    const std::int64_t hi = std::min(lo + kChunk, replications);
    for (std::int64_t rep = lo; rep < hi; ++rep) {
      const auto [hit, log_w] = per_rep(rep);
      if (hit) {
        ++stats.hits;
        stats.weight.add(log_w);
        stats.weight_squared.add(2.0 * log_w);
      }
    }
    partial[static_cast<std::size_t>(c)] = stats;
  };

  const int workers = std::min<std::int64_t>(thread_cap(), chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::int64_t c = next.fetch_add(1);
          if (c >= chunks) return;
          run_chunk(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  ChunkStats merged;
  for (const ChunkStats& stats : partial) merged.merge(stats);
  return merged;
}

}  // namespace

const char* event_name(EventType type) {
  switch (type) {
    case EventType::Arrival: return "arrival";
    case EventType::Service: return "service";
    case EventType::Reneging: return "reneging";
  }
  return "unknown";
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replication) {
  // splitmix64 finalizer over a golden-ratio stride keyed by the replication
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (replication + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int thread_cap() {
  if (const char* env = std::getenv("RENEGE_LDP_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) {
      throw Error(ErrorCode::ConfigInvalid,
                  "RENEGE_LDP_THREADS must be a positive integer");
    }
    return static_cast<int>(std::min<long>(value, 1024));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

SamplePath simulate(const SimConfig& config) {
  require_scale(config);
  return record_path(config, nullptr);
}

SamplePath simulate_tilted(const SimConfig& config, const Trajectory& controls) {
  require_scale(config);
  checked_controls(config, controls);
  return record_path(config, &controls);
}

EstimateReport estimate_naive(const SimConfig& config, TargetRate target,
                              Direction direction) {
  require_scale(config);
  const double threshold = target.gamma * config.horizon.T;
  const ChunkStats stats = run_replications(config.replications, [&](std::int64_t rep) {
    std::mt19937_64 rng(stream_seed(config.seed, static_cast<std::uint64_t>(rep)));
    const Terminal state = run_path(config, rng, nullptr, nullptr);
    const double y_bar_T = static_cast<double>(state.y) / static_cast<double>(config.n);
    return std::pair<bool, double>(event_hit(y_bar_T, threshold, direction), 0.0);
  });

  EstimateReport report;
  report.replications = config.replications;
  report.hits = stats.hits;
  const double n_reps = static_cast<double>(config.replications);
  report.p_hat = static_cast<double>(stats.hits) / n_reps;
  report.degenerate_ci = stats.hits == 0 || stats.hits == config.replications;
  report.ci95 = 1.96 * std::sqrt(report.p_hat * (1.0 - report.p_hat) / n_reps);
  if (report.p_hat > 0.0) {
    report.log_decay = -std::log(report.p_hat) / static_cast<double>(config.n);
  }
  return report;
}

EstimateReport estimate_is(const SimConfig& config, TargetRate target, Direction direction,
                           const Trajectory& controls) {
  require_scale(config);
  checked_controls(config, controls);
  const double threshold = target.gamma * config.horizon.T;
  const ChunkStats stats = run_replications(config.replications, [&](std::int64_t rep) {
    std::mt19937_64 rng(stream_seed(config.seed, static_cast<std::uint64_t>(rep)));
    const Terminal state = run_path(config, rng, &controls, nullptr);
    const double y_bar_T = static_cast<double>(state.y) / static_cast<double>(config.n);
    return std::pair<bool, double>(event_hit(y_bar_T, threshold, direction), state.log_lr);
  });

  EstimateReport report;
  report.replications = config.replications;
  report.hits = stats.hits;
  report.degenerate_ci = stats.hits == 0 || stats.hits == config.replications;
  const double n_reps = static_cast<double>(config.replications);
  if (stats.hits == 0) return report;

  const double log_sum_w = stats.weight.log_value();
  const double log_sum_w2 = stats.weight_squared.log_value();
  const double log_p = log_sum_w - std::log(n_reps);
  report.p_hat = std::exp(log_p);
  report.log_decay = -log_p / static_cast<double>(config.n);
  report.ess = std::exp(2.0 * log_sum_w - log_sum_w2);

  // sample variance of the weighted indicator, assembled in log space so
  // weights far below double range still give a finite half width
  if (config.replications > 1) {
    const double log_mean_sq = 2.0 * log_sum_w - std::log(n_reps);  // (sum w)^2 / N
    const double ratio = std::exp(log_mean_sq - log_sum_w2);
    if (ratio < 1.0) {
      const double log_var =
          log_sum_w2 + std::log1p(-ratio) - std::log(n_reps - 1.0);
      report.ci95 = 1.96 * std::exp(0.5 * (log_var - std::log(n_reps)));
    }
  }
  return report;
}

SweepResult decay_sweep(const SimConfig& config, TargetRate target, Direction direction,
                        const std::vector<std::int64_t>& n_list, const Trajectory& controls) {
  if (n_list.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "decay sweep needs at least one scale");
  }
  SweepResult result;
  result.t_c_gamma =
      config.horizon.T * rate_fn::decay_rate(config.params, target).c_gamma;
  if (config.params.mode == Mode::ManyServer) {
    const el::MultiserverMinimizer reduced =
        el::multiserver_minimizer(config.params, config.horizon, target, 1e-12, 256);
    result.i_star_ref = reduced.cost.total;
  } else {
    const el::TiltParameters tilt = el::solve_tilt(config.params, config.horizon, target);
    const Trajectory traj = el::build_minimizer(config.params, config.horizon, tilt, 256);
    result.i_star_ref =
        el::minimizer_cost(config.params, config.horizon, target, tilt, traj).total;
  }
  result.rows.reserve(n_list.size());
  for (const std::int64_t n : n_list) {
    SimConfig scaled = config;
    scaled.n = n;
    const EstimateReport report = estimate_is(scaled, target, direction, controls);
    SweepRow row;
    row.n = n;
    row.p_hat = report.p_hat;
    row.log_decay = report.log_decay.value_or(std::numeric_limits<double>::quiet_NaN());
    row.ess = report.ess.value_or(0.0);
    row.hits = report.hits;
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace renege_ldp::qsim
