#include "renege_ldp/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace renege_ldp {

std::string format_double(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"lambda", p.lambda},
                     {"mu", p.mu},
                     {"theta", p.theta},
                     {"x0", p.x0},
                     {"mode", mode_name(p.mode)}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  p.lambda = j.value("lambda", p.lambda);
  p.mu = j.value("mu", p.mu);
  p.theta = j.value("theta", p.theta);
  p.x0 = j.value("x0", p.x0);
  if (j.contains("mode")) p.mode = mode_from_name(j.at("mode").get<std::string>());
}

void to_json(nlohmann::json& j, const Horizon& h) { j = nlohmann::json{{"T", h.T}}; }

void from_json(const nlohmann::json& j, Horizon& h) { h.T = j.value("T", h.T); }

void to_json(nlohmann::json& j, const TargetRate& t) { j = nlohmann::json{{"gamma", t.gamma}}; }

void from_json(const nlohmann::json& j, TargetRate& t) { t.gamma = j.value("gamma", t.gamma); }

void to_json(nlohmann::json& j, const CostComponents& c) {
  j = nlohmann::json{{"arrival", c.arrival}, {"service", c.service}, {"reneging", c.reneging}};
}

void to_json(nlohmann::json& j, const CostReport& r) {
  j = nlohmann::json{
      {"total", r.total}, {"normalized", r.normalized}, {"components", r.components}};
  if (r.decay_rate) j["decay_rate"] = *r.decay_rate;
}

namespace rate_fn {

void to_json(nlohmann::json& j, const DecayRateResult& r) {
  j = nlohmann::json{{"c_gamma", r.c_gamma}, {"z_gamma", r.z_gamma}};
}

}  // namespace rate_fn

namespace el {

void to_json(nlohmann::json& j, const TiltParameters& t) {
  j = nlohmann::json{{"a", t.a},
                     {"A", t.A},
                     {"B", t.B},
                     {"lambda_cap", t.lambda_cap},
                     {"residual", t.residual},
                     {"iterations", t.iterations},
                     {"bracket_lo", t.bracket_lo},
                     {"bracket_hi", t.bracket_hi},
                     {"wide_bracket", t.wide_bracket}};
}

void to_json(nlohmann::json& j, const OptimalityCheck& c) {
  j = nlohmann::json{{"name", c.name},
                     {"passed", c.passed},
                     {"skipped", c.skipped},
                     {"value", c.value},
                     {"detail", c.detail}};
}

void to_json(nlohmann::json& j, const OptimalityReport& r) {
  j = nlohmann::json{{"checks", r.checks}, {"all_passed", r.all_passed}};
}

}  // namespace el

namespace qsim {

void to_json(nlohmann::json& j, const EstimateReport& r) {
  j = nlohmann::json{{"p_hat", r.p_hat},
                     {"ci95", r.ci95},
                     {"degenerate_ci", r.degenerate_ci},
                     {"replications", r.replications},
                     {"hits", r.hits}};
  if (r.log_decay) j["log_decay"] = *r.log_decay;
  if (r.ess) j["ess"] = *r.ess;
}

void to_json(nlohmann::json& j, const SweepRow& r) {
  j = nlohmann::json{{"n", r.n},
                     {"p_hat", r.p_hat},
                     {"log_decay", r.log_decay},
                     {"ess", r.ess},
                     {"hits", r.hits}};
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  j = nlohmann::json{
      {"rows", r.rows}, {"i_star_ref", r.i_star_ref}, {"t_c_gamma", r.t_c_gamma}};
}

}  // namespace qsim

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const bool with_controls = traj.controls.has_value();
  out << (with_controls ? "t,xi,zeta,phi1,phi2,phi3\n" : "t,xi,zeta\n");
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out << format_double(traj.t[k]) << ',' << format_double(traj.xi[k]) << ','
        << format_double(traj.zeta[k]);
    if (with_controls) {
      out << ',' << format_double(traj.controls->phi1[k]) << ','
          << format_double(traj.controls->phi2[k]) << ','
          << format_double(traj.controls->phi3[k]);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_field(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last) {
    std::ostringstream os;
    os << "bad numeric field '" << field << "' on line " << line_no;
    throw Error(ErrorCode::ConfigInvalid, os.str());
  }
  return value;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ConfigInvalid, "empty trajectory stream");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_controls = false;
  if (line == "t,xi,zeta,phi1,phi2,phi3") {
    with_controls = true;
  } else if (line != "t,xi,zeta") {
    throw Error(ErrorCode::ConfigInvalid,
                "trajectory header must be t,xi,zeta or t,xi,zeta,phi1,phi2,phi3");
  }
  Trajectory traj;
  if (with_controls) traj.controls.emplace();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::size_t expected = with_controls ? 6 : 3;
    if (fields.size() != expected) {
      std::ostringstream os;
      os << "expected " << expected << " fields on line " << line_no << ", got "
         << fields.size();
      throw Error(ErrorCode::ConfigInvalid, os.str());
    }
    traj.t.push_back(parse_field(fields[0], line_no));
    traj.xi.push_back(parse_field(fields[1], line_no));
    traj.zeta.push_back(parse_field(fields[2], line_no));
    if (with_controls) {
      traj.controls->phi1.push_back(parse_field(fields[3], line_no));
      traj.controls->phi2.push_back(parse_field(fields[4], line_no));
      traj.controls->phi3.push_back(parse_field(fields[5], line_no));
    }
  }
  if (traj.t.size() < 2) {
    throw Error(ErrorCode::GridTooCoarse, "trajectory needs at least two rows");
  }
  return traj;
}

void write_sample_path_csv(std::ostream& out, const qsim::SamplePath& path) {
  out << "t,x_bar,y_bar,event_type\n";
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    out << format_double(path.t[k]) << ',' << format_double(path.x_bar[k]) << ','
        << format_double(path.y_bar[k]) << ',' << qsim::event_name(path.event[k]) << '\n';
  }
}

}  // namespace renege_ldp
