#include "ringflow/sim/kernels.hpp"

#include <cmath>

namespace ringflow::sim {

namespace {

inline double ovm_accel_one(const OvmParams& p, double s, double v,
                            double v_ahead) {
  double vdes;
  if (s <= p.s_st) {
    vdes = 0.0;
  } else if (s >= p.s_go) {
    vdes = p.v_max;
  } else {
    vdes = 0.5 * p.v_max *
           (1.0 - std::cos(M_PI * (s - p.s_st) / (p.s_go - p.s_st)));
  }
  return p.alpha * (vdes - v) + p.beta * (v_ahead - v);
}

}  // namespace

void ovm_accel_serial(const std::vector<OvmParams>& params, const double* s,
                      const double* v, const double* v_ahead, double* out,
                      int n) {
  for (int i = 0; i < n; ++i) {
    out[i] = ovm_accel_one(params[i], s[i], v[i], v_ahead[i]);
  }
}

void ovm_accel_parallel(const std::vector<OvmParams>& params, const double* s,
                        const double* v, const double* v_ahead, double* out,
                        int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    out[i] = ovm_accel_one(params[i], s[i], v[i], v_ahead[i]);
  }
}

void ovm_accel(const std::vector<OvmParams>& params, const double* s,
               const double* v, const double* v_ahead, double* out, int n,
               ExecPolicy exec) {
  if (exec == ExecPolicy::Parallel) {
    ovm_accel_parallel(params, s, v, v_ahead, out, n);
  } else {
    ovm_accel_serial(params, s, v, v_ahead, out, n);
  }
}

}  // namespace ringflow::sim
