#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "renege_ldp/el_minimizer.hpp"
#include "renege_ldp/model.hpp"
#include "renege_ldp/qsim.hpp"
#include "renege_ldp/rate_fn.hpp"

namespace renege_ldp {

// Shortest round-trip decimal form (locale independent); every CSV number
// goes through this so identical runs are byte identical.  JSON output is
// shortest round trip by construction.
std::string format_double(double v);

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);
void to_json(nlohmann::json& j, const Horizon& h);
void from_json(const nlohmann::json& j, Horizon& h);
void to_json(nlohmann::json& j, const TargetRate& t);
void from_json(const nlohmann::json& j, TargetRate& t);
void to_json(nlohmann::json& j, const CostComponents& c);
void to_json(nlohmann::json& j, const CostReport& r);

namespace rate_fn {
void to_json(nlohmann::json& j, const DecayRateResult& r);
}

namespace el {
void to_json(nlohmann::json& j, const TiltParameters& t);
void to_json(nlohmann::json& j, const OptimalityCheck& c);
void to_json(nlohmann::json& j, const OptimalityReport& r);
}

namespace qsim {
void to_json(nlohmann::json& j, const EstimateReport& r);
void to_json(nlohmann::json& j, const SweepRow& r);
void to_json(nlohmann::json& j, const SweepResult& r);
}

// header t,xi,zeta plus phi1,phi2,phi3 when controls are present
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

// header t,x_bar,y_bar,event_type; one row per jump
void write_sample_path_csv(std::ostream& out, const qsim::SamplePath& path);

}  // namespace renege_ldp
