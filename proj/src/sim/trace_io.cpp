#include "ringflow/sim/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ringflow/errors.hpp"

namespace ringflow::sim {

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  const int n = trace.vehicles();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",p_" << i;
  for (int i = 1; i <= n; ++i) out << ",v_" << i;
  for (int i = 1; i <= n; ++i) out << ",s_" << i;
  out << ",u\n";
  char buf[32];
  for (int r = 0; r < trace.samples(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.12g", trace.times[r]);
    out << buf;
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.12g", trace.positions(r, i));
      out << buf;
    }
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.12g", trace.velocities(r, i));
      out << buf;
    }
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.12g", trace.spacings(r, i));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.12g", trace.control(r));
    out << buf << "\n";
  }
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw Error("empty trace file: " + path);
  int cols = 1;
  for (char c : header) {
    if (c == ',') ++cols;
  }
  if ((cols - 2) % 3 != 0) throw Error("malformed trace header: " + path);
  const int n = (cols - 2) / 3;

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    vals.reserve(cols);
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != cols) {
      throw Error("ragged trace row in " + path);
    }
    rows.push_back(std::move(vals));
  }

  SimTrace trace;
  const int m = static_cast<int>(rows.size());
  trace.times.resize(m);
  trace.positions.resize(m, n);
  trace.velocities.resize(m, n);
  trace.spacings.resize(m, n);
  trace.control.resize(m);
  for (int r = 0; r < m; ++r) {
    trace.times[r] = rows[r][0];
    for (int i = 0; i < n; ++i) {
      trace.positions(r, i) = rows[r][1 + i];
      trace.velocities(r, i) = rows[r][1 + n + i];
      trace.spacings(r, i) = rows[r][1 + 2 * n + i];
    }
    trace.control(r) = rows[r][cols - 1];
  }
  return trace;
}

}  // namespace ringflow::sim
