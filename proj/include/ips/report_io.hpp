#pragma once
#include <ostream>
#include <string>

#include "json.hpp"

#include "ips/capacity.hpp"
#include "ips/engine.hpp"
#include "ips/flp.hpp"
#include "ips/fluid.hpp"
#include "ips/instance.hpp"
#include "ips/params.hpp"

namespace ips {

using ordered_json = nlohmann::ordered_json;

std::string digest_hex(std::uint64_t digest);

ordered_json instance_to_json(const Instance& instance);
ordered_json constants_to_json(const DerivedConstants& constants, const Instance& instance);
ordered_json params_to_json(const PolicyParams& params);
ordered_json overrides_to_json(const Overrides& overrides);
ordered_json flp_to_json(const FlpResult& flp, const Instance& instance);
ordered_json report_to_json(const SimReport& report, const Instance& instance);
ordered_json capacity_to_json(const CapacityResult& result);
ordered_json prep_error_to_json(const PrepErrorReport& report, const Instance& instance);
ordered_json contraction_to_json(const ContractionReport& report);

// CSV schemas (time series: time,Q,Q_P,Q_A,Q_R,W_0..W_cK)
void write_timeseries_csv(std::ostream& out, const SimReport& report, const Instance& instance);
void write_trajectory_csv(std::ostream& out, const FluidTrajectory& trajectory);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

}  // namespace ips
