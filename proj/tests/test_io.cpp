#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <renege_ldp/errors.hpp>
#include <renege_ldp/io.hpp>
#include <renege_ldp/model.hpp>
#include <renege_ldp/qsim.hpp>

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

using namespace renege_ldp;

namespace {

double parse_back(const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  REQUIRE(ec == std::errc());
  REQUIRE(ptr == text.data() + text.size());
  return v;
}

Trajectory sample_trajectory(bool with_controls) {
  Trajectory traj;
  traj.t = {0.0, 0.5, 1.0, 1.5};
  traj.xi = {1.0, 1.0 / 3.0, 0.1234567890123456, 2.0};
  traj.zeta = {0.0, 0.25, 0.7, 1.9};
  if (with_controls) {
    Controls c;
    c.phi1 = {1.5, 1.25, 1.1, 1.0};
    c.phi2 = {1.0 / 1.5, 0.8, 1.0 / 1.1, 1.0};
    c.phi3 = {2.0, 1.5, 1.2, 1.0};
    traj.controls = c;
  }
  return traj;
}

}  // namespace

TEST_CASE("format_double round trips exactly and stays short") {
  for (double v : {0.5, 1.0 / 3.0, 0.1, 1e-300, 12345.678, -2.5e17, 0.0,
                   0.1597091012271169}) {
    CHECK(parse_back(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.25) == "-1.25");
}

TEST_CASE("trajectory CSV round trips byte for byte") {
  for (bool with_controls : {false, true}) {
    auto traj = sample_trajectory(with_controls);
    std::ostringstream first;
    write_trajectory_csv(first, traj);

    std::istringstream in(first.str());
    Trajectory read = read_trajectory_csv(in);
    REQUIRE(read.t.size() == traj.t.size());
    CHECK(read.controls.has_value() == with_controls);
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
      CHECK(read.t[k] == traj.t[k]);
      CHECK(read.xi[k] == traj.xi[k]);
      CHECK(read.zeta[k] == traj.zeta[k]);
    }

    std::ostringstream second;
    write_trajectory_csv(second, read);
    CHECK(first.str() == second.str());
  }
}

TEST_CASE("trajectory CSV uses unix newlines and a dot decimal separator") {
  auto traj = sample_trajectory(false);
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  std::string text = out.str();
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find(',') != std::string::npos);
  CHECK(text.rfind("t,xi,zeta\n", 0) == 0);
  CHECK(text.back() == '\n');
}

TEST_CASE("trajectory CSV reader tolerates CRLF input") {
  std::string text = "t,xi,zeta\r\n0,1,0\r\n1,0.5,0.25\r\n";
  std::istringstream in(text);
  auto traj = read_trajectory_csv(in);
  CHECK(traj.t.size() == 2);
  CHECK(traj.xi[1] == 0.5);
}

TEST_CASE("trajectory CSV reader reports what went wrong") {
  {
    std::istringstream in("time;queue\n0;1\n");
    try {
      read_trajectory_csv(in);
      FAIL("bad header accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
  }
  {
    std::istringstream in("t,xi,zeta\n0,1,0\n1,banana,0.5\n");
    try {
      read_trajectory_csv(in);
      FAIL("bad cell accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigInvalid);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  {
    std::istringstream in("t,xi,zeta\n0,1,0\n");
    try {
      read_trajectory_csv(in);
      FAIL("single row accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooCoarse);
    }
  }
}

TEST_CASE("model structs round trip through JSON") {
  ModelParams p;
  p.lambda = 2.5;
  p.mu = 1.25;
  p.theta = 0.75;
  p.x0 = 1.5;
  p.mode = Mode::ManyServer;
  nlohmann::json j = p;
  CHECK(j.at("mode") == "many");
  auto q = j.get<ModelParams>();
  CHECK(q.lambda == p.lambda);
  CHECK(q.mu == p.mu);
  CHECK(q.theta == p.theta);
  CHECK(q.x0 == p.x0);
  CHECK(q.mode == p.mode);

  Horizon h{12.5};
  CHECK(nlohmann::json(h).get<Horizon>().T == 12.5);
  TargetRate t{1.75};
  CHECK(nlohmann::json(t).get<TargetRate>().gamma == 1.75);
}

TEST_CASE("partial JSON patches only the named fields") {
  nlohmann::json j{{"lambda", 3.0}};
  auto p = j.get<ModelParams>();
  CHECK(p.lambda == 3.0);
  CHECK(p.mu == 1.0);  // untouched defaults survive
  CHECK(p.mode == Mode::SingleServer);
}

TEST_CASE("cost report serialization keeps the optional decay rate optional") {
  CostReport r;
  r.total = 1.8;
  r.normalized = 0.18;
  r.components.arrival = 1.3;
  r.components.service = 0.45;
  r.components.reneging = 0.05;
  nlohmann::json without = r;
  CHECK(!without.contains("decay_rate"));
  r.decay_rate = 0.1597;
  nlohmann::json with = r;
  CHECK(with.at("decay_rate") == 0.1597);
  CHECK(with.at("components").at("arrival") == 1.3);
}

TEST_CASE("estimate report serialization mirrors the optionals") {
  qsim::EstimateReport r;
  r.p_hat = 0.25;
  r.ci95 = 0.01;
  r.replications = 100;
  r.hits = 25;
  nlohmann::json j = r;
  CHECK(!j.contains("log_decay"));
  CHECK(!j.contains("ess"));
  r.log_decay = 1.5;
  r.ess = 42.0;
  j = r;
  CHECK(j.at("log_decay") == 1.5);
  CHECK(j.at("ess") == 42.0);
}

TEST_CASE("sample path CSV carries event names") {
  qsim::SamplePath p;
  p.n = 10;
  p.x0_scaled = 1.0;
  p.t = {0.125, 0.5};
  p.x_bar = {1.1, 1.0};
  p.y_bar = {0.0, 0.1};
  p.event = {qsim::EventType::Arrival, qsim::EventType::Reneging};
  std::ostringstream out;
  write_sample_path_csv(out, p);
  std::string text = out.str();
  CHECK(text.rfind("t,x_bar,y_bar,event_type\n", 0) == 0);
  CHECK(text.find("arrival") != std::string::npos);
  CHECK(text.find("reneging") != std::string::npos);
  CHECK(text.find("0.125,1.1,0,arrival") != std::string::npos);
}
