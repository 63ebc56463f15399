// renege-ldp: command line front end for the reneging-queue large deviations library.
//
// Every subcommand prints a single JSON document {command, config, result} so runs
// are reproducible from their own output. Numeric flags mirror JSON config keys
// one-to-one; --config supplies defaults and explicit flags win.

#include "CLI11.hpp"

#include <renege_ldp/el_minimizer.hpp>
#include <renege_ldp/errors.hpp>
#include <renege_ldp/fluid.hpp>
#include <renege_ldp/io.hpp>
#include <renege_ldp/model.hpp>
#include <renege_ldp/qsim.hpp>
#include <renege_ldp/rate_fn.hpp>
#include <renege_ldp/variational_oracle.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace renege_ldp;

// ---------------------------------------------------------------------------
// config file merging

// Ties a CLI option to a config-file key. After parsing, keys present in the
// config file fill in any option the user did not pass on the command line.
class ConfigMerge {
 public:
  template <typename T>
  void bind(CLI::Option* opt, const std::string& key, T& ref) {
    entries_.push_back({opt, key, [&ref, key](const json& cfg) { cfg.at(key).get_to(ref); }});
  }

  void apply(const json& cfg) const {
    if (!cfg.is_object()) {
      throw Error(ErrorCode::ConfigInvalid, "config file must hold a JSON object");
    }
    for (const auto& item : cfg.items()) {
      bool known = false;
      for (const auto& e : entries_) {
        if (e.key == item.key()) {
          known = true;
          break;
        }
      }
      if (!known) {
        throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + item.key() + "'");
      }
    }
    for (const auto& e : entries_) {
      if (cfg.contains(e.key) && e.opt->count() == 0) {
        try {
          e.fill(cfg);
        } catch (const json::exception& ex) {
          throw Error(ErrorCode::ConfigInvalid,
                      "config key '" + e.key + "': " + ex.what());
        }
      }
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::function<void(const json&)> fill;
  };
  std::vector<Entry> entries_;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "config file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// small file helpers around the stream-based CSV layer

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write '" + path + "'");
  write_trajectory_csv(out, traj);
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open controls file '" + path + "'");
  return read_trajectory_csv(in);
}

void write_sample_path_file(const std::string& path, const qsim::SamplePath& sample) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write '" + path + "'");
  write_sample_path_csv(out, sample);
}

// ---------------------------------------------------------------------------
// option bundles shared by the subcommands

struct CommonOpts {
  double lambda = 2.0;
  double mu = 1.0;
  double theta = 1.0;
  double x0 = 1.0;
  std::string mode = "single";
  double T = 10.0;
  double gamma = 2.0;
  std::string config_path;
  std::string output_path;

  ModelParams params() const {
    ModelParams p;
    p.lambda = lambda;
    p.mu = mu;
    p.theta = theta;
    p.x0 = x0;
    p.mode = mode_from_name(mode);
    return p;
  }

  json echo_model() const {
    return json{{"lambda", lambda}, {"mu", mu},   {"theta", theta},
                {"x0", x0},         {"mode", mode}};
  }
};

void add_model_flags(CLI::App* cmd, ConfigMerge& merge, CommonOpts& o) {
  merge.bind(cmd->add_option("--lambda", o.lambda, "arrival rate"), "lambda", o.lambda);
  merge.bind(cmd->add_option("--mu", o.mu, "service rate"), "mu", o.mu);
  merge.bind(cmd->add_option("--theta", o.theta, "reneging rate"), "theta", o.theta);
  merge.bind(cmd->add_option("--x0", o.x0, "initial scaled queue length"), "x0", o.x0);
  merge.bind(cmd->add_option("--mode", o.mode, "single or many (server pool scaling)"),
             "mode", o.mode);
}

void add_io_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; explicit flags win");
  cmd->add_option("--output", o.output_path, "write the JSON document here instead of stdout");
}

void emit(const json& doc, const std::string& output_path) {
  std::string text = doc.dump(2);
  text.push_back('\n');
  if (output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write '" + output_path + "'");
    out << text;
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::string item;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    item = text.substr(start, comma - start);
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, flag + ": cannot parse '" + item + "' as a number");
    }
    start = comma + 1;
    if (comma == text.size()) break;
  }
  if (values.empty()) throw Error(ErrorCode::ConfigInvalid, flag + ": empty list");
  return values;
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<std::int64_t> values;
  for (double v : parse_double_list(text, flag)) {
    auto n = static_cast<std::int64_t>(v);
    if (static_cast<double>(n) != v) {
      throw Error(ErrorCode::ConfigInvalid, flag + ": expected integers");
    }
    values.push_back(n);
  }
  return values;
}

qsim::Direction parse_direction(const std::string& text) {
  if (text == "at-least") return qsim::Direction::AtLeast;
  if (text == "at-most") return qsim::Direction::AtMost;
  throw Error(ErrorCode::ConfigInvalid, "--direction must be 'at-least' or 'at-most'");
}

// ---------------------------------------------------------------------------
// decay-rate

struct DecayRateOpts {
  CommonOpts common;
  bool with_heuristic = false;
  int resolution = 20000;
};

int run_decay_rate(const DecayRateOpts& o) {
  ModelParams params = o.common.params();
  // The decay rate depends only on lambda, mu, gamma; validate the rates the
  // way the trajectory machinery would, but without mode/x0 constraints.
  ModelParams probe = params;
  probe.mode = Mode::SingleServer;
  probe.x0 = 0.0;
  validate(probe, Horizon{1.0}, Purpose::Variational);
  TargetRate target{o.common.gamma};
  rate_fn::DecayRateResult result = rate_fn::decay_rate(params, target);

  json result_json = result;
  if (o.with_heuristic) {
    double h = rate_fn::heuristic_decay_rate(params, target, o.resolution, false);
    result_json["heuristic_c_gamma"] = h;
    result_json["heuristic_gap"] = h - result.c_gamma;
  }

  json config = o.common.echo_model();
  config["gamma"] = o.common.gamma;
  config["with-heuristic"] = o.with_heuristic;
  config["resolution"] = o.resolution;
  emit(json{{"command", "decay-rate"}, {"config", config}, {"result", result_json}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// fluid

struct FluidOpts {
  CommonOpts common;
  int grid = 400;
  std::string method = "closed";
  std::string trajectory_out;
};

int run_fluid(const FluidOpts& o) {
  ModelParams params = o.common.params();
  Horizon horizon{o.common.T};
  Trajectory traj;
  if (o.method == "closed") {
    traj = fluid::lln_trajectory(params, horizon, o.grid);
  } else if (o.method == "rk4") {
    traj = fluid::integrate_fluid(params, horizon, o.grid);
  } else {
    throw Error(ErrorCode::ConfigInvalid, "--method must be 'closed' or 'rk4'");
  }

  json result{{"xi_T", traj.xi.back()}, {"zeta_T", traj.zeta.back()}, {"method", o.method}};
  try {
    result["zero_cost_rate"] = fluid::zero_cost_rate(params, horizon);
  } catch (const Error&) {
    // undefined outside the lambda >= mu regime; omit rather than guess
  }
  if (!o.trajectory_out.empty()) {
    write_trajectory_file(o.trajectory_out, traj);
    result["trajectory_csv"] = o.trajectory_out;
  }

  json config = o.common.echo_model();
  config["T"] = o.common.T;
  config["grid"] = o.grid;
  config["method"] = o.method;
  emit(json{{"command", "fluid"}, {"config", config}, {"result", result}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// minimizer

struct MinimizerOpts {
  CommonOpts common;
  int grid = 2000;
  double tol = 1e-12;
  std::string trajectory_out;
};

int run_minimizer(const MinimizerOpts& o) {
  ModelParams params = o.common.params();
  Horizon horizon{o.common.T};
  TargetRate target{o.common.gamma};

  Trajectory traj;
  CostReport cost;
  json result;
  if (o.common.gamma == 0.0) {
    if (params.mode != Mode::SingleServer) {
      throw Error(ErrorCode::ConfigInvalid,
                  "gamma = 0 is only implemented for single-server mode");
    }
    auto zero = el::zero_reneging_path(params, horizon, o.grid);
    traj = std::move(zero.first);
    cost = zero.second;
    result["family"] = "drain";
    result["drain_time"] = params.x0;
  } else {
    if (params.mode == Mode::SingleServer) {
      el::TiltParameters tilt = el::solve_tilt(params, horizon, target, o.tol);
      traj = el::build_minimizer(params, horizon, tilt, o.grid);
      cost = el::minimizer_cost(params, horizon, target, tilt, traj);
      el::OptimalityReport opt = el::verify_optimality(params, horizon, tilt, traj);
      result["tilt"] = tilt;
      result["optimality"] = opt;
    } else {
      auto many = el::multiserver_minimizer(params, horizon, target, o.tol, o.grid);
      traj = many.trajectory;
      cost = many.cost;
      // optimality is certified on the shifted-down single-server problem
      ModelParams reduced = params;
      reduced.mode = Mode::SingleServer;
      reduced.x0 = params.x0 - 1.0;
      Trajectory reduced_traj = el::build_minimizer(reduced, horizon, many.tilt, o.grid);
      el::OptimalityReport opt = el::verify_optimality(reduced, horizon, many.tilt, reduced_traj);
      result["tilt"] = many.tilt;
      result["optimality"] = opt;
    }
    result["family"] = "shooting";
  }

  result["cost"] = cost;
  result["xi_T"] = traj.xi.back();
  result["zeta_T"] = traj.zeta.back();
  result["gamma_T"] = o.common.gamma * o.common.T;
  if (!o.trajectory_out.empty()) {
    write_trajectory_file(o.trajectory_out, traj);
    result["trajectory_csv"] = o.trajectory_out;
  }

  json config = o.common.echo_model();
  config["T"] = o.common.T;
  config["gamma"] = o.common.gamma;
  config["grid"] = o.grid;
  config["tol"] = o.tol;
  emit(json{{"command", "minimizer"}, {"config", config}, {"result", result}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOpts {
  CommonOpts common;
  std::string segments = "250,500,1000,2000";
  int max_iters = 60000;
  double tol = 1e-10;
  std::string trajectory_out;
};

int run_oracle(const OracleOpts& o) {
  ModelParams params = o.common.params();
  Horizon horizon{o.common.T};
  TargetRate target{o.common.gamma};
  std::vector<std::int64_t> wide = parse_int_list(o.segments, "--segments");
  std::vector<int> segment_counts(wide.begin(), wide.end());

  auto rows = oracle::refinement_study(params, horizon, target, segment_counts, o.max_iters,
                                       o.tol);

  json row_json = json::array();
  for (const auto& row : rows) {
    row_json.push_back(json{{"segments", row.segments},
                            {"objective", row.objective},
                            {"gap", row.gap},
                            {"iterations", row.iterations}});
  }
  json result{{"reference_cost", rows.front().objective - rows.front().gap},
              {"rows", row_json}};

  if (!o.trajectory_out.empty()) {
    oracle::DiscreteProblem problem;
    problem.params = params;
    problem.horizon = horizon;
    problem.target = target;
    problem.segments = segment_counts.back();
    auto solved = oracle::optimize(problem, o.max_iters, o.tol);
    write_trajectory_file(o.trajectory_out, solved.trajectory);
    result["trajectory_csv"] = o.trajectory_out;
  }

  json config = o.common.echo_model();
  config["T"] = o.common.T;
  config["gamma"] = o.common.gamma;
  config["segments"] = o.segments;
  config["max-iters"] = o.max_iters;
  config["tol"] = o.tol;
  emit(json{{"command", "oracle"}, {"config", config}, {"result", result}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  CommonOpts common;
  std::int64_t n = 100;
  std::uint64_t seed = 1;
  std::string controls_path;
  std::string path_out;
};

int run_simulate(const SimulateOpts& o) {
  qsim::SimConfig config;
  config.params = o.common.params();
  config.horizon = Horizon{o.common.T};
  config.n = o.n;
  config.seed = o.seed;
  config.replications = 1;

  qsim::SamplePath sample;
  if (o.controls_path.empty()) {
    sample = qsim::simulate(config);
  } else {
    Trajectory controls = read_trajectory_file(o.controls_path);
    sample = qsim::simulate_tilted(config, controls);
  }

  json result{{"n", o.n},
              {"x0_scaled", sample.x0_scaled},
              {"x_bar_T", sample.x_bar_T},
              {"y_bar_T", sample.y_bar_T},
              {"log_likelihood_ratio", sample.log_lr},
              {"events", sample.arrivals + sample.services + sample.renegings},
              {"arrivals", sample.arrivals},
              {"services", sample.services},
              {"renegings", sample.renegings}};
  if (!o.path_out.empty()) {
    write_sample_path_file(o.path_out, sample);
    result["path_csv"] = o.path_out;
  }

  json cfg = o.common.echo_model();
  cfg["T"] = o.common.T;
  cfg["n"] = o.n;
  cfg["seed"] = o.seed;
  if (!o.controls_path.empty()) cfg["controls"] = o.controls_path;
  emit(json{{"command", "simulate"}, {"config", cfg}, {"result", result}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateOpts {
  CommonOpts common;
  std::int64_t n = 10;
  std::uint64_t seed = 1;
  std::int64_t replications = 100000;
  std::string method = "is";
  std::string direction = "at-least";
  std::string controls_path;
  int grid = 200;
  double tol = 1e-12;
};

Trajectory derive_controls(const ModelParams& params, const Horizon& horizon,
                           const TargetRate& target, const std::string& controls_path,
                           double tol, int grid) {
  if (!controls_path.empty()) return read_trajectory_file(controls_path);
  if (params.mode == Mode::SingleServer) {
    el::TiltParameters tilt = el::solve_tilt(params, horizon, target, tol);
    return el::build_minimizer(params, horizon, tilt, grid);
  }
  return el::multiserver_minimizer(params, horizon, target, tol, grid).trajectory;
}

int run_estimate(const EstimateOpts& o) {
  qsim::SimConfig config;
  config.params = o.common.params();
  config.horizon = Horizon{o.common.T};
  config.n = o.n;
  config.seed = o.seed;
  config.replications = o.replications;
  TargetRate target{o.common.gamma};
  qsim::Direction direction = parse_direction(o.direction);

  qsim::EstimateReport report;
  if (o.method == "naive") {
    report = qsim::estimate_naive(config, target, direction);
  } else if (o.method == "is") {
    Trajectory controls = derive_controls(config.params, config.horizon, target,
                                          o.controls_path, o.tol, o.grid);
    report = qsim::estimate_is(config, target, direction, controls);
  } else {
    throw Error(ErrorCode::ConfigInvalid, "--method must be 'naive' or 'is'");
  }
  json result = report;
  result["method"] = o.method;

  json cfg = o.common.echo_model();
  cfg["T"] = o.common.T;
  cfg["gamma"] = o.common.gamma;
  cfg["n"] = o.n;
  cfg["seed"] = o.seed;
  cfg["replications"] = o.replications;
  cfg["method"] = o.method;
  cfg["direction"] = o.direction;
  cfg["grid"] = o.grid;
  cfg["tol"] = o.tol;
  if (!o.controls_path.empty()) cfg["controls"] = o.controls_path;
  emit(json{{"command", "estimate"}, {"config", cfg}, {"result", result}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
  CommonOpts common;
  std::string scales = "10,20,40,80";
  std::int64_t replications = 100000;
  std::uint64_t seed = 1;
  std::string direction = "at-least";
  std::string controls_path;
  int grid = 200;
  double tol = 1e-12;
};

int run_sweep(const SweepOpts& o) {
  qsim::SimConfig config;
  config.params = o.common.params();
  config.horizon = Horizon{o.common.T};
  config.seed = o.seed;
  config.replications = o.replications;
  TargetRate target{o.common.gamma};
  qsim::Direction direction = parse_direction(o.direction);
  std::vector<std::int64_t> scales = parse_int_list(o.scales, "--scales");
  config.n = scales.front();

  Trajectory controls = derive_controls(config.params, config.horizon, target, o.controls_path,
                                        o.tol, o.grid);
  qsim::SweepResult sweep = qsim::decay_sweep(config, target, direction, scales, controls);

  json cfg = o.common.echo_model();
  cfg["T"] = o.common.T;
  cfg["gamma"] = o.common.gamma;
  cfg["scales"] = o.scales;
  cfg["replications"] = o.replications;
  cfg["seed"] = o.seed;
  cfg["direction"] = o.direction;
  cfg["grid"] = o.grid;
  cfg["tol"] = o.tol;
  if (!o.controls_path.empty()) cfg["controls"] = o.controls_path;
  emit(json{{"command", "sweep"}, {"config", cfg}, {"result", json(sweep)}},
       o.common.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// paradox-check

struct ParadoxOpts {
  CommonOpts common;
  std::string thetas = "0.5,1,2";
  std::string horizons = "50,200";
  int grid = 2000;
  double tol = 1e-12;
  int resolution = 20000;
  bool search_theta = false;
};

int run_paradox_check(const ParadoxOpts& o) {
  ModelParams base = o.common.params();
  Horizon horizon{o.common.T};
  TargetRate target{o.common.gamma};
  std::vector<double> thetas = parse_double_list(o.thetas, "--thetas");
  std::vector<double> horizons = parse_double_list(o.horizons, "--horizons");

  // The decay rate must not move when theta does. Report it per theta and
  // flag whether all values are bit identical.
  json theta_rows = json::array();
  double first_c = 0.0;
  bool bit_identical = true;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    ModelParams params = base;
    params.theta = thetas[i];
    auto decay = rate_fn::decay_rate(params, target);
    el::TiltParameters tilt = el::solve_tilt(params, horizon, target, o.tol);
    Trajectory traj = el::build_minimizer(params, horizon, tilt, o.grid);
    CostReport cost = el::minimizer_cost(params, horizon, target, tilt, traj);
    double heuristic = rate_fn::heuristic_decay_rate(params, target, o.resolution,
                                                     o.search_theta);
    if (i == 0) {
      first_c = decay.c_gamma;
    } else if (decay.c_gamma != first_c) {
      bit_identical = false;
    }
    theta_rows.push_back(json{{"theta", thetas[i]},
                              {"c_gamma", decay.c_gamma},
                              {"heuristic_c_gamma", heuristic},
                              {"normalized_cost", cost.normalized},
                              {"total_cost", cost.total},
                              {"reneging_share", cost.components.reneging / cost.total}});
  }

  // Long-horizon decay of the reneging share at the base theta.
  json horizon_rows = json::array();
  for (double T : horizons) {
    Horizon h{T};
    el::TiltParameters tilt = el::solve_tilt(base, h, target, o.tol);
    Trajectory traj = el::build_minimizer(base, h, tilt, o.grid);
    CostReport cost = el::minimizer_cost(base, h, target, tilt, traj);
    horizon_rows.push_back(json{{"T", T},
                                {"reneging_component", cost.components.reneging},
                                {"reneging_component_per_T", cost.components.reneging / T},
                                {"reneging_share", cost.components.reneging / cost.total},
                                {"total_cost", cost.total},
                                {"normalized_cost", cost.normalized}});
  }

  json result{{"theta_table", theta_rows},
              {"decay_rate_bit_identical", bit_identical},
              {"horizon_table", horizon_rows}};

  json cfg = o.common.echo_model();
  cfg["T"] = o.common.T;
  cfg["gamma"] = o.common.gamma;
  cfg["thetas"] = o.thetas;
  cfg["horizons"] = o.horizons;
  cfg["grid"] = o.grid;
  cfg["tol"] = o.tol;
  cfg["resolution"] = o.resolution;
  cfg["search-theta"] = o.search_theta;
  emit(json{{"command", "paradox-check"}, {"config", cfg}, {"result", result}},
       o.common.output_path);
  return 0;
}

void emit_error(ErrorCode code, const std::string& message) {
  // Error::what() already carries the "Code: " prefix; drop it for the field
  std::string clean = message;
  std::string prefix = std::string(to_string(code)) + ": ";
  if (clean.rfind(prefix, 0) == 0) clean = clean.substr(prefix.size());
  json doc{{"error", {{"code", to_string(code)},
                      {"message", clean},
                      {"status", exit_status(code)}}}};
  std::cerr << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"large deviations toolkit for single-server queues with reneging"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "renege-ldp 1.0.0");

  DecayRateOpts decay_opts;
  FluidOpts fluid_opts;
  MinimizerOpts minimizer_opts;
  OracleOpts oracle_opts;
  SimulateOpts simulate_opts;
  EstimateOpts estimate_opts;
  SweepOpts sweep_opts;
  ParadoxOpts paradox_opts;

  ConfigMerge decay_merge, fluid_merge, minimizer_merge, oracle_merge, simulate_merge,
      estimate_merge, sweep_merge, paradox_merge;

  auto* decay_cmd = app.add_subcommand(
      "decay-rate", "closed-form long-run decay rate of the throughput upper tail");
  add_model_flags(decay_cmd, decay_merge, decay_opts.common);
  decay_merge.bind(decay_cmd->add_option("--gamma", decay_opts.common.gamma, "target throughput"),
                   "gamma", decay_opts.common.gamma);
  decay_merge.bind(
      decay_cmd->add_flag("--with-heuristic", decay_opts.with_heuristic,
                          "also run the stationary grid search and report the gap"),
      "with-heuristic", decay_opts.with_heuristic);
  decay_merge.bind(decay_cmd->add_option("--resolution", decay_opts.resolution,
                                         "grid resolution for the heuristic search"),
                   "resolution", decay_opts.resolution);
  add_io_flags(decay_cmd, decay_opts.common);

  auto* fluid_cmd = app.add_subcommand("fluid", "law-of-large-numbers trajectory");
  add_model_flags(fluid_cmd, fluid_merge, fluid_opts.common);
  fluid_merge.bind(fluid_cmd->add_option("--T", fluid_opts.common.T, "horizon"), "T",
                   fluid_opts.common.T);
  fluid_merge.bind(fluid_cmd->add_option("--grid", fluid_opts.grid, "number of segments"),
                   "grid", fluid_opts.grid);
  fluid_merge.bind(
      fluid_cmd->add_option("--method", fluid_opts.method, "closed (exact) or rk4 (integrated)"),
      "method", fluid_opts.method);
  fluid_cmd->add_option("--trajectory-out", fluid_opts.trajectory_out,
                        "write t,xi,zeta CSV here");
  add_io_flags(fluid_cmd, fluid_opts.common);

  auto* minimizer_cmd = app.add_subcommand(
      "minimizer", "optimal trajectory and cost for a throughput target");
  add_model_flags(minimizer_cmd, minimizer_merge, minimizer_opts.common);
  minimizer_merge.bind(minimizer_cmd->add_option("--T", minimizer_opts.common.T, "horizon"), "T",
                       minimizer_opts.common.T);
  minimizer_merge.bind(
      minimizer_cmd->add_option("--gamma", minimizer_opts.common.gamma, "target throughput"),
      "gamma", minimizer_opts.common.gamma);
  minimizer_merge.bind(
      minimizer_cmd->add_option("--grid", minimizer_opts.grid, "trajectory sample segments"),
      "grid", minimizer_opts.grid);
  minimizer_merge.bind(
      minimizer_cmd->add_option("--tol", minimizer_opts.tol, "shooting solver tolerance"), "tol",
      minimizer_opts.tol);
  minimizer_cmd->add_option("--trajectory-out", minimizer_opts.trajectory_out,
                            "write t,xi,zeta,phi1,phi2,phi3 CSV here");
  add_io_flags(minimizer_cmd, minimizer_opts.common);

  auto* oracle_cmd = app.add_subcommand(
      "oracle", "discretized variational solve with grid refinement");
  add_model_flags(oracle_cmd, oracle_merge, oracle_opts.common);
  oracle_merge.bind(oracle_cmd->add_option("--T", oracle_opts.common.T, "horizon"), "T",
                    oracle_opts.common.T);
  oracle_merge.bind(
      oracle_cmd->add_option("--gamma", oracle_opts.common.gamma, "target throughput"), "gamma",
      oracle_opts.common.gamma);
  oracle_merge.bind(
      oracle_cmd->add_option("--segments", oracle_opts.segments, "comma separated grid sizes"),
      "segments", oracle_opts.segments);
  oracle_merge.bind(
      oracle_cmd->add_option("--max-iters", oracle_opts.max_iters, "iteration cap per grid"),
      "max-iters", oracle_opts.max_iters);
  oracle_merge.bind(
      oracle_cmd->add_option("--tol", oracle_opts.tol, "relative decrease convergence tolerance"),
      "tol", oracle_opts.tol);
  oracle_cmd->add_option("--trajectory-out", oracle_opts.trajectory_out,
                         "write the finest-grid solution CSV here");
  add_io_flags(oracle_cmd, oracle_opts.common);

  auto* simulate_cmd = app.add_subcommand(
      "simulate", "one exact sample path of the scaled queue");
  add_model_flags(simulate_cmd, simulate_merge, simulate_opts.common);
  simulate_merge.bind(simulate_cmd->add_option("--T", simulate_opts.common.T, "horizon"), "T",
                      simulate_opts.common.T);
  simulate_merge.bind(simulate_cmd->add_option("--n", simulate_opts.n, "scaling parameter"), "n",
                      simulate_opts.n);
  simulate_merge.bind(simulate_cmd->add_option("--seed", simulate_opts.seed, "RNG seed"), "seed",
                      simulate_opts.seed);
  simulate_cmd->add_option("--controls", simulate_opts.controls_path,
                           "CSV of tilt controls; omit for the untilted chain");
  simulate_cmd->add_option("--path-out", simulate_opts.path_out,
                           "write the event log CSV here");
  add_io_flags(simulate_cmd, simulate_opts.common);

  auto* estimate_cmd = app.add_subcommand(
      "estimate", "probability that throughput reaches gamma by time T");
  add_model_flags(estimate_cmd, estimate_merge, estimate_opts.common);
  estimate_merge.bind(estimate_cmd->add_option("--T", estimate_opts.common.T, "horizon"), "T",
                      estimate_opts.common.T);
  estimate_merge.bind(
      estimate_cmd->add_option("--gamma", estimate_opts.common.gamma, "target throughput"),
      "gamma", estimate_opts.common.gamma);
  estimate_merge.bind(estimate_cmd->add_option("--n", estimate_opts.n, "scaling parameter"), "n",
                      estimate_opts.n);
  estimate_merge.bind(estimate_cmd->add_option("--seed", estimate_opts.seed, "RNG seed"), "seed",
                      estimate_opts.seed);
  estimate_merge.bind(
      estimate_cmd->add_option("--replications", estimate_opts.replications,
                               "replication count"),
      "replications", estimate_opts.replications);
  estimate_merge.bind(estimate_cmd->add_option("--method", estimate_opts.method, "naive or is"),
                      "method", estimate_opts.method);
  estimate_merge.bind(
      estimate_cmd->add_option("--direction", estimate_opts.direction, "at-least or at-most"),
      "direction", estimate_opts.direction);
  estimate_merge.bind(
      estimate_cmd->add_option("--grid", estimate_opts.grid,
                               "control grid when deriving tilts"),
      "grid", estimate_opts.grid);
  estimate_merge.bind(
      estimate_cmd->add_option("--tol", estimate_opts.tol, "shooting tolerance for tilts"),
      "tol", estimate_opts.tol);
  estimate_cmd->add_option("--controls", estimate_opts.controls_path,
                           "CSV of tilt controls; omit to derive from the minimizer");
  add_io_flags(estimate_cmd, estimate_opts.common);

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "importance-sampled decay estimates across scaling parameters");
  add_model_flags(sweep_cmd, sweep_merge, sweep_opts.common);
  sweep_merge.bind(sweep_cmd->add_option("--T", sweep_opts.common.T, "horizon"), "T",
                   sweep_opts.common.T);
  sweep_merge.bind(
      sweep_cmd->add_option("--gamma", sweep_opts.common.gamma, "target throughput"), "gamma",
      sweep_opts.common.gamma);
  sweep_merge.bind(
      sweep_cmd->add_option("--scales", sweep_opts.scales,
                            "comma separated scaling parameters"),
      "scales", sweep_opts.scales);
  sweep_merge.bind(
      sweep_cmd->add_option("--replications", sweep_opts.replications,
                            "replications per scale"),
      "replications", sweep_opts.replications);
  sweep_merge.bind(sweep_cmd->add_option("--seed", sweep_opts.seed, "RNG seed"), "seed",
                   sweep_opts.seed);
  sweep_merge.bind(
      sweep_cmd->add_option("--direction", sweep_opts.direction, "at-least or at-most"),
      "direction", sweep_opts.direction);
  sweep_merge.bind(sweep_cmd->add_option("--grid", sweep_opts.grid, "control grid for the tilts"),
                   "grid", sweep_opts.grid);
  sweep_merge.bind(sweep_cmd->add_option("--tol", sweep_opts.tol, "shooting tolerance"), "tol",
                   sweep_opts.tol);
  sweep_cmd->add_option("--controls", sweep_opts.controls_path,
                        "CSV of tilt controls; omit to derive from the minimizer");
  add_io_flags(sweep_cmd, sweep_opts.common);

  auto* paradox_cmd = app.add_subcommand(
      "paradox-check", "show the decay rate ignoring theta while path costs move");
  add_model_flags(paradox_cmd, paradox_merge, paradox_opts.common);
  paradox_merge.bind(paradox_cmd->add_option("--T", paradox_opts.common.T, "horizon"), "T",
                     paradox_opts.common.T);
  paradox_merge.bind(
      paradox_cmd->add_option("--gamma", paradox_opts.common.gamma, "target throughput"),
      "gamma", paradox_opts.common.gamma);
  paradox_merge.bind(
      paradox_cmd->add_option("--thetas", paradox_opts.thetas,
                              "comma separated reneging rates"),
      "thetas", paradox_opts.thetas);
  paradox_merge.bind(
      paradox_cmd->add_option("--horizons", paradox_opts.horizons,
                              "comma separated horizons for the reneging share table"),
      "horizons", paradox_opts.horizons);
  paradox_merge.bind(
      paradox_cmd->add_option("--grid", paradox_opts.grid, "trajectory sample segments"), "grid",
      paradox_opts.grid);
  paradox_merge.bind(paradox_cmd->add_option("--tol", paradox_opts.tol, "shooting tolerance"),
                     "tol", paradox_opts.tol);
  paradox_merge.bind(
      paradox_cmd->add_option("--resolution", paradox_opts.resolution,
                              "grid resolution for the stationary heuristic"),
      "resolution", paradox_opts.resolution);
  paradox_merge.bind(
      paradox_cmd->add_flag("--search-theta", paradox_opts.search_theta,
                            "let the heuristic search over effective reneging rates too"),
      "search-theta", paradox_opts.search_theta);
  add_io_flags(paradox_cmd, paradox_opts.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(ErrorCode::ConfigInvalid, e.what());
    return exit_status(ErrorCode::ConfigInvalid);
  }

  try {
    auto merge_config = [](const CommonOpts& common, const ConfigMerge& merge) {
      if (!common.config_path.empty()) merge.apply(load_config_file(common.config_path));
    };
    if (app.got_subcommand(decay_cmd)) {
      merge_config(decay_opts.common, decay_merge);
      return run_decay_rate(decay_opts);
    }
    if (app.got_subcommand(fluid_cmd)) {
      merge_config(fluid_opts.common, fluid_merge);
      return run_fluid(fluid_opts);
    }
    if (app.got_subcommand(minimizer_cmd)) {
      merge_config(minimizer_opts.common, minimizer_merge);
      return run_minimizer(minimizer_opts);
    }
    if (app.got_subcommand(oracle_cmd)) {
      merge_config(oracle_opts.common, oracle_merge);
      return run_oracle(oracle_opts);
    }
    if (app.got_subcommand(simulate_cmd)) {
      merge_config(simulate_opts.common, simulate_merge);
      return run_simulate(simulate_opts);
    }
    if (app.got_subcommand(estimate_cmd)) {
      merge_config(estimate_opts.common, estimate_merge);
      return run_estimate(estimate_opts);
    }
    if (app.got_subcommand(sweep_cmd)) {
      merge_config(sweep_opts.common, sweep_merge);
      return run_sweep(sweep_opts);
    }
    if (app.got_subcommand(paradox_cmd)) {
      merge_config(paradox_opts.common, paradox_merge);
      return run_paradox_check(paradox_opts);
    }
    emit_error(ErrorCode::ConfigInvalid, "no subcommand selected");
    return exit_status(ErrorCode::ConfigInvalid);
  } catch (const Error& e) {
    emit_error(e.code(), e.what());
    return exit_status(e.code());
  } catch (const json::exception& e) {
    emit_error(ErrorCode::ConfigInvalid, e.what());
    return exit_status(ErrorCode::ConfigInvalid);
  } catch (const std::exception& e) {
    emit_error(ErrorCode::NumericsFailed, e.what());
    return exit_status(ErrorCode::NumericsFailed);
  }
}
