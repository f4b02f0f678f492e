#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sdepca/integrators.hpp"
#include "sdepca/model.hpp"
#include "sdepca/montecarlo.hpp"

namespace sdepca {

/// 17 significant digits: round-trips every double.
std::string format_double(double value);

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj);
void write_weak_error_csv(std::ostream& out, const WeakErrorReport& report);
void write_ergodicity_csv(std::ostream& out, const ErgodicityReport& report);
void write_contraction_csv(std::ostream& out, const ContractionReport& report);
void write_moment_csv(std::ostream& out, const MomentReport& report);

void to_json(nlohmann::json& j, const Trajectory<double>& traj);
void to_json(nlohmann::json& j, const WeakErrorReport& report);
void to_json(nlohmann::json& j, const ErgodicityReport& report);
void to_json(nlohmann::json& j, const ContractionReport& report);
void to_json(nlohmann::json& j, const MomentReport& report);
void to_json(nlohmann::json& j, const ProbeReport& report);
void to_json(nlohmann::json& j, const ContractionRates<double>& rates);
void to_json(nlohmann::json& j, const DissipativityParams<double>& params);

/// Writes `content` to `path`, or to standard output when `path` is empty or "-".
void write_output(const std::string& path, const std::string& content);

}  // namespace sdepca
