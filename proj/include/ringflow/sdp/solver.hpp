#pragma once

#include "ringflow/sdp/program.hpp"

namespace ringflow::sdp {

/// Solves the conic program with a primal-dual path-following interior
/// point method (HKM direction, Mehrotra predictor-corrector). Infeasible
/// programs are reported through a Farkas-type certificate formed from the
/// dual iterates, not by iteration timeout.
SolveOutcome solve(const ConicProgram& program, const SolverOptions& options = {});

}  // namespace ringflow::sdp
