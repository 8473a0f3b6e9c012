#pragma once

namespace ringflow {

/// Execution policy for the data-parallel kernels. Parallel variants are
/// written so that results are bit-identical to the serial reference.
enum class ExecPolicy { Serial, Parallel };

}  // namespace ringflow
