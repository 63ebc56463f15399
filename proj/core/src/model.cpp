#include "renege_ldp/model.hpp"

#include <cmath>
#include <sstream>

namespace renege_ldp {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::RateNonpositive: return "RateNonpositive";
    case ErrorCode::LambdaLessThanMu: return "LambdaLessThanMu";
    case ErrorCode::ManyServerX0TooSmall: return "ManyServerX0TooSmall";
    case ErrorCode::HorizonNonpositive: return "HorizonNonpositive";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::BoundaryInfeasible: return "BoundaryInfeasible";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NegativeStart: return "NegativeStart";
    case ErrorCode::GammaNonpositive: return "GammaNonpositive";
    case ErrorCode::BracketingFailed: return "BracketingFailed";
    case ErrorCode::OptimalityViolated: return "OptimalityViolated";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ControlNotPositive: return "ControlNotPositive";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::NumericsFailed: return "NumericsFailed";
  }
  return "UnknownError";
}

int exit_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::BracketingFailed:
    case ErrorCode::OptimalityViolated:
    case ErrorCode::NotConverged:
    case ErrorCode::NumericsFailed:
      return 3;
    default:
      return 2;
  }
}

ModelParams validate(const ModelParams& params, const Horizon& horizon, Purpose purpose) {
  const bool finite = std::isfinite(params.lambda) && std::isfinite(params.mu) &&
                      std::isfinite(params.theta) && std::isfinite(params.x0) &&
                      std::isfinite(horizon.T);
  if (!finite) {
    throw Error(ErrorCode::ConfigInvalid, "model parameters must be finite");
  }
  if (params.lambda <= 0.0 || params.mu <= 0.0 || params.theta <= 0.0) {
    std::ostringstream os;
    os << "rates must be positive (lambda=" << params.lambda << ", mu=" << params.mu
       << ", theta=" << params.theta << ")";
    throw Error(ErrorCode::RateNonpositive, os.str());
  }
  if (params.x0 < 0.0) {
    throw Error(ErrorCode::NegativeArgument, "x0 must be nonnegative");
  }
  if (horizon.T <= 0.0) {
    throw Error(ErrorCode::HorizonNonpositive, "horizon T must be positive");
  }
  if (purpose == Purpose::Variational) {
    if (params.lambda < params.mu) {
      throw Error(ErrorCode::LambdaLessThanMu,
                  "variational work needs lambda >= mu (stable regime has no atypical decay)");
    }
    if (params.mode == Mode::ManyServer && params.x0 < 1.0) {
      throw Error(ErrorCode::ManyServerX0TooSmall,
                  "many-server variational work needs x0 >= 1");
    }
  }
  return params;
}

std::vector<double> uniform_grid(double T, int segments) {
  if (segments < 1) {
    throw Error(ErrorCode::GridTooCoarse, "need at least one segment");
  }
  std::vector<double> t(static_cast<std::size_t>(segments) + 1);
  const double dt = T / segments;
  for (int j = 0; j < segments; ++j) t[static_cast<std::size_t>(j)] = j * dt;
  t.back() = T;
  return t;
}

void check_trajectory(const Trajectory& traj, double slope_slack) {
  const std::size_t m = traj.t.size();
  if (m < 2) {
    throw Error(ErrorCode::GridTooCoarse, "trajectory needs at least two nodes");
  }
  if (traj.xi.size() != m || traj.zeta.size() != m) {
    throw Error(ErrorCode::ConfigInvalid, "trajectory arrays must have matching sizes");
  }
  if (traj.controls) {
    if (traj.controls->phi1.size() != m || traj.controls->phi2.size() != m ||
        traj.controls->phi3.size() != m) {
      throw Error(ErrorCode::ConfigInvalid, "control arrays must match the grid");
    }
  }
  if (traj.t.front() != 0.0) {
    throw Error(ErrorCode::ConfigInvalid, "grid must start at 0");
  }
  const double dt = traj.t[1] - traj.t[0];
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "grid must be strictly increasing");
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double step = traj.t[k] - traj.t[k - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-9 * (1.0 + dt)) {
      throw Error(ErrorCode::ConfigInvalid, "grid must be uniform");
    }
  }
  if (std::abs(traj.zeta.front()) > slope_slack) {
    throw Error(ErrorCode::ConfigInvalid, "zeta must start at 0");
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (traj.xi[k] < -slope_slack) {
      throw Error(ErrorCode::ConfigInvalid, "xi must stay nonnegative");
    }
    if (k > 0 && traj.zeta[k] < traj.zeta[k - 1] - slope_slack) {
      throw Error(ErrorCode::ConfigInvalid, "zeta must be nondecreasing");
    }
  }
}

std::string mode_name(Mode mode) {
  return mode == Mode::SingleServer ? "single" : "many";
}

Mode mode_from_name(const std::string& name) {
  if (name == "single" || name == "single_server") return Mode::SingleServer;
  if (name == "many" || name == "many_server") return Mode::ManyServer;
  throw Error(ErrorCode::ConfigInvalid, "mode must be 'single' or 'many', got '" + name + "'");
}

}  // namespace renege_ldp
