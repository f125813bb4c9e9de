#pragma once

#include "avgtrack/harness.hpp"
#include "avgtrack/scalar_dp.hpp"

#include <ostream>
#include <span>
#include <string>

namespace avgtrack {

/// 17 significant digits, '.' decimal point; round-trips every double.
std::string format_real(double value);

/// Header k,x0..,u0..,y0..; one row per state. The final row has empty
/// input cells because the last state has no input.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Header method,avg_index,surrogate_index,quadratic_index,converged.
void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows);

/// Header x,V,policy.
void write_value_table_csv(std::ostream& out, const ValueTable& table);

}  // namespace avgtrack
