#pragma once

#include <vector>

#include "ringflow/car_following.hpp"
#include "ringflow/exec.hpp"

namespace ringflow::sim {

/// Car-following accelerations for the whole ring in one sweep:
/// a[i] = alpha_i (V_i(s[i]) - v[i]) + beta_i (v_ahead[i] - v[i]).
/// The parallel variant partitions vehicles and is bit-identical to the
/// serial reference; it pays off for rings far larger than the paper's.
void ovm_accel_serial(const std::vector<OvmParams>& params, const double* s,
                      const double* v, const double* v_ahead, double* out,
                      int n);
void ovm_accel_parallel(const std::vector<OvmParams>& params, const double* s,
                        const double* v, const double* v_ahead, double* out,
                        int n);
void ovm_accel(const std::vector<OvmParams>& params, const double* s,
               const double* v, const double* v_ahead, double* out, int n,
               ExecPolicy exec);

}  // namespace ringflow::sim
