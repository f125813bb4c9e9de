#include "avgtrack/csv.hpp"

#include <cmath>
#include <cstdio>

namespace avgtrack {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
  const Eigen::Index p = traj.outputs.empty() ? 0 : traj.outputs.front().size();
  out << "k";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  for (Eigen::Index i = 0; i < p; ++i) out << ",y" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_real(traj.states[k](i));
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      if (k < traj.inputs.size()) out << format_real(traj.inputs[k](i));
    }
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << format_real(traj.outputs[k](i));
    out << '\n';
  }
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "method,avg_index,surrogate_index,quadratic_index,converged\n";
  for (const BenchmarkRow& row : rows) {
    out << row.method << ',' << format_real(row.avg_index) << ',' << format_real(row.surrogate_index) << ','
        << format_real(row.quadratic_index) << ',' << (row.converged ? "true" : "false") << '\n';
  }
}

void write_value_table_csv(std::ostream& out, const ValueTable& table) {
  out << "x,V,policy\n";
  for (int i = 0; i < table.grid.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out << format_real(table.grid.node(i)) << ',' << format_real(table.values[idx]) << ','
        << format_real(table.policy[idx]) << '\n';
  }
}

}  // namespace avgtrack
