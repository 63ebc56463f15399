#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <renege_ldp/el_minimizer.hpp>
#include <renege_ldp/errors.hpp>
#include <renege_ldp/model.hpp>
#include <renege_ldp/rate_fn.hpp>

#include <cmath>

using namespace renege_ldp;

namespace {

ModelParams canonical() {
  ModelParams p;
  p.lambda = 2.0;
  p.mu = 1.0;
  p.theta = 1.0;
  p.x0 = 1.0;
  return p;
}

}  // namespace

TEST_CASE("shooting solve reproduces the frozen tilt at T = 10") {
  auto p = canonical();
  auto tilt = el::solve_tilt(p, Horizon{10.0}, TargetRate{2.0});
  CHECK(tilt.a == doctest::Approx(0.29633168333695536).epsilon(1e-9));
  CHECK(tilt.B == doctest::Approx(1.4211240954292608).epsilon(1e-9));
  CHECK(std::abs(tilt.residual) <= 1e-10);
  CHECK(tilt.B * (1.0 - tilt.a) == doctest::Approx(1.0).epsilon(1e-13));
  // the solver hands back its own sign-change certificate
  CHECK(el::tilt_defect(p, Horizon{10.0}, TargetRate{2.0}, tilt.bracket_lo) < 0.0);
  CHECK(el::tilt_defect(p, Horizon{10.0}, TargetRate{2.0}, tilt.bracket_hi) > 0.0);
}

TEST_CASE("shooting defect is increasing in the tilt variable") {
  auto p = canonical();
  for (double T : {2.0, 10.0, 50.0}) {
    for (double gamma : {0.5, 2.0, 3.5}) {
      double prev = el::tilt_defect(p, Horizon{T}, TargetRate{gamma}, -5.0);
      for (double a : {-2.0, -0.5, 0.0, 0.4, 0.8, 0.95}) {
        double cur = el::tilt_defect(p, Horizon{T}, TargetRate{gamma}, a);
        CHECK(cur > prev);
        prev = cur;
      }
    }
  }
}

TEST_CASE("closed-form costs across horizons") {
  auto p = canonical();
  TargetRate g{2.0};
  struct Row {
    double T;
    double total;
  };
  // frozen against an independent discretized solve of the same functional
  for (auto row : {Row{10.0, 1.8132801763644437}, Row{20.0, 3.3975037346},
                   Row{50.0, 8.1817212539}, Row{200.0, 32.1347298999}}) {
    auto tilt = el::solve_tilt(p, Horizon{row.T}, g);
    auto traj = el::build_minimizer(p, Horizon{row.T}, tilt, 2000);
    auto cost = el::minimizer_cost(p, Horizon{row.T}, g, tilt, traj);
    CHECK(cost.total == doctest::Approx(row.total).epsilon(1e-9));
    CHECK(cost.normalized == doctest::Approx(row.total / row.T).epsilon(1e-9));
    REQUIRE(cost.decay_rate.has_value());
    CHECK(*cost.decay_rate == doctest::Approx(0.1597091012271169).epsilon(1e-12));
  }
}

TEST_CASE("normalized cost error against the decay rate shrinks with the horizon") {
  auto p = canonical();
  TargetRate g{2.0};
  double c = rate_fn::decay_rate(p, g).c_gamma;
  double prev_err = 1e9;
  for (double T : {10.0, 20.0, 50.0, 200.0}) {
    auto tilt = el::solve_tilt(p, Horizon{T}, g);
    auto traj = el::build_minimizer(p, Horizon{T}, tilt, 200);
    auto cost = el::minimizer_cost(p, Horizon{T}, g, tilt, traj);
    double err = std::abs(cost.normalized - c);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-3);  // T = 200 sits within 0.001 of C(gamma)
}

TEST_CASE("quadrature over the built trajectory matches the closed form") {
  auto p = canonical();
  TargetRate g{2.0};
  Horizon h{10.0};
  auto tilt = el::solve_tilt(p, h, g);
  auto traj = el::build_minimizer(p, h, tilt, 20000);
  auto quad = rate_fn::path_cost(p, traj);
  auto closed = el::minimizer_cost(p, h, g, tilt, traj);
  CHECK(quad.total == doctest::Approx(closed.total).epsilon(1e-7));
  // the component split comes from the same quadrature, so it must add up
  double sum = closed.components.arrival + closed.components.service +
               closed.components.reneging;
  CHECK(sum == doctest::Approx(quad.total).epsilon(1e-12));
}

TEST_CASE("terminal conditions hold on the built trajectory") {
  auto p = canonical();
  for (double gamma : {0.5, 1.5, 3.0}) {
    for (double T : {5.0, 20.0}) {
      for (double x0 : {0.0, 0.5, 2.0}) {
        p.x0 = x0;
        auto tilt = el::solve_tilt(p, Horizon{T}, TargetRate{gamma});
        auto traj = el::build_minimizer(p, Horizon{T}, tilt, 500);
        REQUIRE(traj.controls.has_value());
        CHECK(std::abs(traj.zeta.back() - gamma * T) <= 1e-8 * gamma * T);
        CHECK(std::abs(traj.controls->phi1.back() - 1.0) <= 1e-12);
        CHECK(traj.zeta.front() == 0.0);
        CHECK(traj.xi.front() == x0);
      }
    }
  }
}

TEST_CASE("optimality diagnostics pass on canonical instances") {
  auto p = canonical();
  for (double T : {10.0, 200.0}) {
    auto tilt = el::solve_tilt(p, Horizon{T}, TargetRate{2.0});
    auto traj = el::build_minimizer(p, Horizon{T}, tilt, 1000);
    auto report = el::verify_optimality(p, Horizon{T}, tilt, traj);
    CHECK(report.all_passed);
    for (const auto& check : report.checks) {
      CHECK((check.passed || check.skipped));
    }
  }
}

TEST_CASE("long horizons drive the terminal tilt toward the stationary level") {
  auto p = canonical();
  TargetRate g{2.0};
  double zinv = 1.0 / rate_fn::tilt_root(p, g);
  auto t50 = el::solve_tilt(p, Horizon{50.0}, g);
  auto t500 = el::solve_tilt(p, Horizon{500.0}, g);
  double d50 = std::abs(t50.B - zinv);
  double d500 = std::abs(t500.B - zinv);
  CHECK(d50 > 8e-3);
  CHECK(d50 < 1.2e-2);
  CHECK(d500 < 1.1e-3);
  CHECK(d500 < d50 / 8.0);  // gap closes like 1/T
}

TEST_CASE("the typical rate needs no tilt") {
  auto p = canonical();
  // with x0 at the equilibrium the LLN reneging rate is exactly lambda - mu
  for (double T : {5.0, 50.0}) {
    auto tilt = el::solve_tilt(p, Horizon{T}, TargetRate{1.0});
    CHECK(std::abs(tilt.a) <= 1e-9);
    auto traj = el::build_minimizer(p, Horizon{T}, tilt, 200);
    auto cost = el::minimizer_cost(p, Horizon{T}, TargetRate{1.0}, tilt, traj);
    CHECK(std::abs(cost.total) <= 1e-10);
  }
  // off-equilibrium start: the zero-cost rate follows the fluid transient
  p.x0 = 0.5;
  double T = 5.0;
  double gamma_star =
      (p.lambda - p.mu) +
      (1.0 - std::exp(-p.theta * T)) / T * (p.x0 - (p.lambda - p.mu) / p.theta);
  auto tilt = el::solve_tilt(p, Horizon{T}, TargetRate{gamma_star});
  CHECK(std::abs(tilt.a) <= 1e-6);
  auto traj = el::build_minimizer(p, Horizon{T}, tilt, 200);
  auto cost = el::minimizer_cost(p, Horizon{T}, TargetRate{gamma_star}, tilt, traj);
  CHECK(std::abs(cost.total) <= 1e-10);
}

TEST_CASE("zero-target path drains and sits") {
  auto p = canonical();
  auto [traj, cost] = el::zero_reneging_path(p, Horizon{10.0}, 2000);
  CHECK(cost.total == doctest::Approx(2.73730306).epsilon(1e-6));
  // suppressing reneging while draining costs exactly theta x0^2 / 2
  CHECK(cost.components.reneging == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(traj.zeta.back() == 0.0);
  CHECK(traj.xi.back() == 0.0);
  REQUIRE(cost.decay_rate.has_value());
  CHECK(*cost.decay_rate == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-13));

  CHECK_THROWS_AS(el::zero_reneging_path(p, Horizon{0.5}, 100), Error);
  try {
    el::zero_reneging_path(p, Horizon{0.5}, 100);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HorizonTooShort);
  }
}

TEST_CASE("gamma at or below zero is rejected by the shooting solver") {
  auto p = canonical();
  try {
    el::solve_tilt(p, Horizon{10.0}, TargetRate{0.0});
    FAIL("gamma = 0 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GammaNonpositive);
  }
  CHECK_THROWS_AS(el::solve_tilt(p, Horizon{10.0}, TargetRate{-1.0}), Error);
}

TEST_CASE("absurd targets fail with a bracketing error, not garbage") {
  auto p = canonical();
  try {
    el::solve_tilt(p, Horizon{10.0}, TargetRate{1e20});
    FAIL("gamma = 1e20 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BracketingFailed);
  }
}

TEST_CASE("many-server minimizer is the single-server solution raised by one") {
  auto many = canonical();
  many.mode = Mode::ManyServer;
  many.x0 = 2.0;
  auto single = canonical();  // x0 = 1
  Horizon h{10.0};
  TargetRate g{2.0};
  auto reduced_tilt = el::solve_tilt(single, h, g);
  auto reduced_traj = el::build_minimizer(single, h, reduced_tilt, 400);
  auto reduced_cost = el::minimizer_cost(single, h, g, reduced_tilt, reduced_traj);

  auto lifted = el::multiserver_minimizer(many, h, g, 1e-12, 400);
  CHECK(lifted.tilt.a == reduced_tilt.a);
  CHECK(lifted.cost.total == doctest::Approx(reduced_cost.total).epsilon(1e-12));
  REQUIRE(lifted.trajectory.t.size() == reduced_traj.t.size());
  for (std::size_t k = 0; k < reduced_traj.t.size(); ++k) {
    CHECK(std::abs(lifted.trajectory.xi[k] - (reduced_traj.xi[k] + 1.0)) <= 1e-10);
    CHECK(std::abs(lifted.trajectory.zeta[k] - reduced_traj.zeta[k]) <= 1e-10);
  }
  REQUIRE(lifted.cost.decay_rate.has_value());
  CHECK(*lifted.cost.decay_rate == *reduced_cost.decay_rate);

  auto bad = many;
  bad.x0 = 0.5;
  CHECK_THROWS_AS(el::multiserver_minimizer(bad, h, g, 1e-12, 100), Error);
}
