#pragma once

#include <string>

#include "ringflow/sim/simulator.hpp"

namespace ringflow::sim {

/// CSV trace format, version 1: one row per sample with columns
///   t, p_1..p_n, v_1..v_n, s_1..s_n, u
/// in exactly that order (vehicle 1 = CAV).
void write_trace_csv(const SimTrace& trace, const std::string& path);

/// Reads back a version-1 CSV trace (used by round-trip tests).
SimTrace read_trace_csv(const std::string& path);

}  // namespace ringflow::sim
