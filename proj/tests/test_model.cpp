#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <renege_ldp/errors.hpp>
#include <renege_ldp/model.hpp>

#include <cmath>
#include <functional>
#include <set>

using namespace renege_ldp;

namespace {

ModelParams base_params() {
  ModelParams p;
  p.lambda = 2.0;
  p.mu = 1.0;
  p.theta = 1.0;
  p.x0 = 1.0;
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::NumericsFailed;
}

}  // namespace

TEST_CASE("validate accepts the canonical parameter set") {
  CHECK_NOTHROW(validate(base_params(), Horizon{10.0}, Purpose::Variational));
  CHECK_NOTHROW(validate(base_params(), Horizon{10.0}, Purpose::Simulation));
}

TEST_CASE("validate rejects nonpositive rates") {
  auto p = base_params();
  p.lambda = 0.0;
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Simulation); }) ==
        ErrorCode::RateNonpositive);
  p = base_params();
  p.mu = -1.0;
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Simulation); }) ==
        ErrorCode::RateNonpositive);
  p = base_params();
  p.theta = 0.0;
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Simulation); }) ==
        ErrorCode::RateNonpositive);
}

TEST_CASE("validate rejects bad horizon, x0 and non-finite input") {
  auto p = base_params();
  CHECK(code_of([&] { validate(p, Horizon{0.0}, Purpose::Simulation); }) ==
        ErrorCode::HorizonNonpositive);
  p.x0 = -0.5;
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Simulation); }) ==
        ErrorCode::NegativeArgument);
  p = base_params();
  p.lambda = std::nan("");
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Simulation); }) ==
        ErrorCode::ConfigInvalid);
}

TEST_CASE("variational purpose needs lambda >= mu, simulation does not") {
  auto p = base_params();
  p.lambda = 0.5;  // subcritical
  CHECK_NOTHROW(validate(p, Horizon{1.0}, Purpose::Simulation));
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Variational); }) ==
        ErrorCode::LambdaLessThanMu);
}

TEST_CASE("many-server variational work starts at or above the server line") {
  auto p = base_params();
  p.mode = Mode::ManyServer;
  p.x0 = 0.5;
  CHECK_NOTHROW(validate(p, Horizon{1.0}, Purpose::Simulation));
  CHECK(code_of([&] { validate(p, Horizon{1.0}, Purpose::Variational); }) ==
        ErrorCode::ManyServerX0TooSmall);
  p.x0 = 1.0;
  CHECK_NOTHROW(validate(p, Horizon{1.0}, Purpose::Variational));
}

TEST_CASE("uniform_grid hits both endpoints exactly") {
  auto t = uniform_grid(10.0, 400);
  REQUIRE(t.size() == 401);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 10.0);  // pinned, not accumulated
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] > t[k - 1]);
}

TEST_CASE("check_trajectory flags malformed inputs") {
  Trajectory good;
  good.t = {0.0, 0.5, 1.0};
  good.xi = {1.0, 0.8, 0.7};
  good.zeta = {0.0, 0.1, 0.2};
  CHECK_NOTHROW(check_trajectory(good));

  auto bad = good;
  bad.xi.pop_back();
  CHECK_THROWS_AS(check_trajectory(bad), Error);

  bad = good;
  bad.t = {0.0, 0.7, 1.0};  // non-uniform
  CHECK_THROWS_AS(check_trajectory(bad), Error);

  bad = good;
  bad.zeta = {0.0, 0.2, 0.1};  // decreasing cumulative renegings
  CHECK_THROWS_AS(check_trajectory(bad), Error);

  bad = good;
  bad.zeta = {0.1, 0.2, 0.3};  // must start at zero
  CHECK_THROWS_AS(check_trajectory(bad), Error);

  bad = good;
  bad.xi[1] = -0.5;
  CHECK_THROWS_AS(check_trajectory(bad), Error);

  bad = good;
  bad.t = {0.0};
  bad.xi = {1.0};
  bad.zeta = {0.0};
  CHECK_THROWS_AS(check_trajectory(bad), Error);
}

TEST_CASE("mode names round trip and aliases parse") {
  CHECK(mode_from_name("single") == Mode::SingleServer);
  CHECK(mode_from_name("many") == Mode::ManyServer);
  CHECK(mode_from_name("single_server") == Mode::SingleServer);
  CHECK(mode_from_name("many_server") == Mode::ManyServer);
  CHECK(mode_name(Mode::SingleServer) == std::string("single"));
  CHECK(mode_name(Mode::ManyServer) == std::string("many"));
  CHECK(code_of([] { mode_from_name("dual"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("error codes map to the documented exit statuses") {
  CHECK(exit_status(ErrorCode::BracketingFailed) == 3);
  CHECK(exit_status(ErrorCode::OptimalityViolated) == 3);
  CHECK(exit_status(ErrorCode::NotConverged) == 3);
  CHECK(exit_status(ErrorCode::NumericsFailed) == 3);
  CHECK(exit_status(ErrorCode::ConfigInvalid) == 2);
  CHECK(exit_status(ErrorCode::RateNonpositive) == 2);
  CHECK(exit_status(ErrorCode::GridTooCoarse) == 2);
  CHECK(exit_status(ErrorCode::GammaNonpositive) == 2);
}

TEST_CASE("every error code has a distinct printable name") {
  std::set<std::string> names;
  for (int c = 0; c <= static_cast<int>(ErrorCode::NumericsFailed); ++c) {
    names.insert(to_string(static_cast<ErrorCode>(c)));
  }
  CHECK(names.size() == static_cast<std::size_t>(ErrorCode::NumericsFailed) + 1);
}

TEST_CASE("Error carries its code and prefixes the message") {
  Error e(ErrorCode::GridTooCoarse, "too few nodes");
  CHECK(e.code() == ErrorCode::GridTooCoarse);
  CHECK(std::string(e.what()) == "GridTooCoarse: too few nodes");
}
