#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <renege_ldp/el_minimizer.hpp>
#include <renege_ldp/errors.hpp>
#include <renege_ldp/model.hpp>
#include <renege_ldp/qsim.hpp>

#include <cmath>
#include <cstdlib>
#include <string>

using namespace renege_ldp;

namespace {

qsim::SimConfig canonical_sim(std::int64_t n, double T, std::uint64_t seed) {
  qsim::SimConfig cfg;
  cfg.params.lambda = 2.0;
  cfg.params.mu = 1.0;
  cfg.params.theta = 1.0;
  cfg.params.x0 = 1.0;
  cfg.horizon.T = T;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

Trajectory constant_controls(double T, double phi1, double phi2, double phi3) {
  Trajectory traj;
  traj.t = {0.0, 0.5 * T, T};
  traj.xi = {1.0, 1.0, 1.0};
  traj.zeta = {0.0, 0.5 * T, T};
  Controls c;
  c.phi1 = {phi1, phi1, phi1};
  c.phi2 = {phi2, phi2, phi2};
  c.phi3 = {phi3, phi3, phi3};
  traj.controls = c;
  return traj;
}

struct EnvGuard {
  std::string name;
  std::string saved;
  bool had = false;
  EnvGuard(const char* var, const char* value) : name(var) {
    if (const char* old = std::getenv(var)) {
      had = true;
      saved = old;
    }
    setenv(var, value, 1);
  }
  ~EnvGuard() {
    if (had) {
      setenv(name.c_str(), saved.c_str(), 1);
    } else {
      unsetenv(name.c_str());
    }
  }
};

}  // namespace

TEST_CASE("simulation is deterministic for a fixed seed") {
  auto cfg = canonical_sim(500, 3.0, 11);
  auto a = qsim::simulate(cfg);
  auto b = qsim::simulate(cfg);
  CHECK(a.x_bar_T == b.x_bar_T);
  CHECK(a.y_bar_T == b.y_bar_T);
  REQUIRE(a.t.size() == b.t.size());
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    CHECK(a.t[k] == b.t[k]);
    CHECK(a.x_bar[k] == b.x_bar[k]);
    CHECK(a.event[k] == b.event[k]);
  }
  auto c = canonical_sim(500, 3.0, 12);
  CHECK(qsim::simulate(c).x_bar_T != a.x_bar_T);
}

TEST_CASE("event counts reconstruct the terminal state exactly") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto cfg = canonical_sim(100, 4.0, seed);
    auto p = qsim::simulate(cfg);
    double rebuilt =
        p.x0_scaled + static_cast<double>(p.arrivals - p.services - p.renegings) / 100.0;
    CHECK(p.x_bar_T == rebuilt);
    CHECK(p.y_bar_T == static_cast<double>(p.renegings) / 100.0);
    CHECK(p.log_lr == 0.0);  // untilted paths carry no weight correction
  }
}

TEST_CASE("initial state rounds ties to even") {
  // x0 values chosen exactly representable so n * x0 really is a half-integer
  auto cfg = canonical_sim(10, 0.01, 5);
  cfg.params.x0 = 0.25;  // 2.5 heads rounds to 2
  CHECK(qsim::simulate(cfg).x0_scaled == 0.2);
  auto cfg4 = canonical_sim(4, 0.01, 5);
  cfg4.params.x0 = 0.875;  // 3.5 heads rounds to 4
  CHECK(qsim::simulate(cfg4).x0_scaled == 1.0);
}

TEST_CASE("identity tilt leaves the likelihood ratio at zero") {
  auto cfg = canonical_sim(200, 2.0, 21);
  auto controls = constant_controls(2.0, 1.0, 1.0, 1.0);
  auto p = qsim::simulate_tilted(cfg, controls);
  CHECK(p.log_lr == 0.0);
  CHECK(p.arrivals + p.services + p.renegings > 0);
}

TEST_CASE("sample paths concentrate on the fluid limit") {
  auto cfg = canonical_sim(20000, 5.0, 31);
  auto p = qsim::simulate(cfg);
  // the LLN path is flat at 1 with cumulative renegings t
  double sup = std::abs(p.x0_scaled - 1.0);
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    sup = std::max(sup, std::abs(p.x_bar[k] - 1.0));
  }
  CHECK(sup < 0.05);
  CHECK(std::abs(p.y_bar_T - 5.0) < 0.1);
}

TEST_CASE("importance weights average to one under any tilt") {
  // P(Ybar >= 0) = 1, so the importance estimate of it is the mean weight
  auto cfg = canonical_sim(5, 1.0, 41);
  cfg.replications = 10000;
  auto controls = constant_controls(1.0, 1.25, 0.8, 1.1);
  auto report = qsim::estimate_is(cfg, TargetRate{0.0}, qsim::Direction::AtLeast, controls);
  CHECK(report.hits == report.replications);
  CHECK(std::abs(report.p_hat - 1.0) <= 1.6 * report.ci95);
  CHECK(std::abs(report.p_hat - 1.0) < 0.05);
  REQUIRE(report.ess.has_value());
  CHECK(*report.ess > 1000.0);
}

TEST_CASE("importance and naive estimates agree through their intervals") {
  auto cfg = canonical_sim(5, 2.0, 51);
  cfg.replications = 30000;
  TargetRate target{1.5};
  auto naive = qsim::estimate_naive(cfg, target, qsim::Direction::AtLeast);

  auto p = cfg.params;
  auto tilt = el::solve_tilt(p, cfg.horizon, target);
  auto controls = el::build_minimizer(p, cfg.horizon, tilt, 200);
  auto is = qsim::estimate_is(cfg, target, qsim::Direction::AtLeast, controls);

  CHECK(naive.p_hat > 0.0);
  CHECK(is.p_hat > 0.0);
  CHECK(std::abs(naive.p_hat - is.p_hat) <= naive.ci95 + is.ci95);
  REQUIRE(naive.log_decay.has_value());
  REQUIRE(is.log_decay.has_value());
  CHECK(*naive.log_decay == doctest::Approx(*is.log_decay).epsilon(0.05));
}

TEST_CASE("direction flag flips the tail") {
  auto cfg = canonical_sim(5, 2.0, 61);
  cfg.replications = 4000;
  auto hi = qsim::estimate_naive(cfg, TargetRate{5.0}, qsim::Direction::AtMost);
  CHECK(hi.p_hat > 0.99);  // almost every path stays below an extreme target
  auto lo = qsim::estimate_naive(cfg, TargetRate{5.0}, qsim::Direction::AtLeast);
  CHECK(lo.p_hat < 0.01);
  CHECK(hi.replications == 4000);
}

TEST_CASE("degenerate naive estimates are flagged instead of inventing a CI") {
  auto cfg = canonical_sim(50, 2.0, 71);
  cfg.replications = 200;
  auto report = qsim::estimate_naive(cfg, TargetRate{4.0}, qsim::Direction::AtLeast);
  CHECK(report.hits == 0);
  CHECK(report.p_hat == 0.0);
  CHECK(report.degenerate_ci);
  CHECK(!report.log_decay.has_value());
}

TEST_CASE("tilted runs need positive controls that cover the horizon") {
  auto cfg = canonical_sim(20, 2.0, 81);
  auto bad = constant_controls(2.0, 0.0, 1.0, 1.0);
  try {
    qsim::simulate_tilted(cfg, bad);
    FAIL("phi1 = 0 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ControlNotPositive);
  }
  auto no_controls = constant_controls(2.0, 1.0, 1.0, 1.0);
  no_controls.controls.reset();
  CHECK_THROWS_AS(qsim::simulate_tilted(cfg, no_controls), Error);
  auto short_grid = constant_controls(1.0, 1.0, 1.0, 1.0);  // covers [0,1], horizon is 2
  CHECK_THROWS_AS(qsim::simulate_tilted(cfg, short_grid), Error);
}

TEST_CASE("replication streams are distinct and reproducible") {
  CHECK(qsim::stream_seed(1, 0) != qsim::stream_seed(1, 1));
  CHECK(qsim::stream_seed(1, 0) != qsim::stream_seed(2, 0));
  CHECK(qsim::stream_seed(9, 7) == qsim::stream_seed(9, 7));
}

TEST_CASE("estimates do not depend on the thread schedule") {
  auto cfg = canonical_sim(5, 1.5, 91);
  cfg.replications = 6000;
  TargetRate target{1.2};
  double p1, p3;
  {
    EnvGuard env("RENEGE_LDP_THREADS", "1");
    p1 = qsim::estimate_naive(cfg, target, qsim::Direction::AtLeast).p_hat;
  }
  {
    EnvGuard env("RENEGE_LDP_THREADS", "3");
    p3 = qsim::estimate_naive(cfg, target, qsim::Direction::AtLeast).p_hat;
  }
  CHECK(p1 == p3);
}

TEST_CASE("thread cap honors and validates the environment override") {
  {
    EnvGuard env("RENEGE_LDP_THREADS", "2");
    CHECK(qsim::thread_cap() == 2);
  }
  {
    EnvGuard env("RENEGE_LDP_THREADS", "not-a-number");
    CHECK_THROWS_AS(qsim::thread_cap(), Error);
  }
  {
    EnvGuard env("RENEGE_LDP_THREADS", "0");
    CHECK_THROWS_AS(qsim::thread_cap(), Error);
  }
}

TEST_CASE("event names are printable") {
  CHECK(std::string(qsim::event_name(qsim::EventType::Arrival)) == "arrival");
  CHECK(std::string(qsim::event_name(qsim::EventType::Service)) == "service");
  CHECK(std::string(qsim::event_name(qsim::EventType::Reneging)) == "reneging");
}

TEST_CASE("many-server simulation keeps reneging above the server line") {
  qsim::SimConfig cfg = canonical_sim(200, 3.0, 101);
  cfg.params.mode = Mode::ManyServer;
  cfg.params.x0 = 2.0;
  auto p = qsim::simulate(cfg);
  CHECK(p.arrivals + p.services + p.renegings > 0);
  // fluid limit: xi relaxes from 2 toward 1 + (lambda-mu)/theta = 2, so it stays near 2
  CHECK(std::abs(p.x_bar_T - 2.0) < 0.35);
}
