#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evi/errors.hpp"
#include "evi/grid.hpp"

namespace evi {

// Full-precision (%.17g) CSV with a leading time column. States occupy the
// n_steps+1 grid points; controls and per-step fields the n_steps left
// endpoints. Output is byte-deterministic for a given trajectory.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 const TimeGrid& grid) {
  const int rows = static_cast<int>(traj.size());
  if (rows != grid.n_steps && rows != grid.n_steps + 1)
    throw ConfigError("write_trajectory_csv: trajectory does not fit the grid");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("write_trajectory_csv: cannot open " + path);
  const int dim = rows > 0 ? static_cast<int>(traj[0].size()) : 0;
  std::fputs("t", f);
  for (int i = 0; i < dim; ++i) std::fprintf(f, ",node_%d", i);
  std::fputc('\n', f);
  for (int k = 0; k < rows; ++k) {
    std::fprintf(f, "%.17g", grid.time(k));
    for (int i = 0; i < traj[k].size(); ++i) std::fprintf(f, ",%.17g", traj[k][i]);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

// Reads a trajectory CSV; the header row is optional, the time column is
// ignored. Row/column counts are enforced and parse failures are reported
// with their line number.
inline Trajectory read_trajectory_csv(const std::string& path, int expected_rows,
                                      int expected_cols) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_trajectory_csv: cannot open " + path);
  Trajectory out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line_no == 1 && !fields.empty() && fields[0] == "t") continue;  // header
    if (static_cast<int>(fields.size()) != expected_cols + 1)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(expected_cols + 1) + " columns, got " +
                        std::to_string(fields.size()));
    Eigen::VectorXd row(expected_cols);
    for (int i = 0; i <= expected_cols; ++i) {
      const char* s = fields[i].c_str();
      char* end = nullptr;
      const double value = std::strtod(s, &end);
      if (end == s || *end != '\0')
        throw ConfigError(path + ":" + std::to_string(line_no) + ": cannot parse '" + fields[i] +
                          "' as a number");
      if (i > 0) row[i - 1] = value;
    }
    out.push_back(std::move(row));
  }
  if (static_cast<int>(out.size()) != expected_rows)
    throw ConfigError(path + ": expected " + std::to_string(expected_rows) + " data rows, got " +
                      std::to_string(out.size()));
  return out;
}

}  // namespace evi
