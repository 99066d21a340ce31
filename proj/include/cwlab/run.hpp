#pragma once

#include <ostream>

#include "cwlab/config.hpp"
#include "cwlab/report.hpp"

namespace cwlab {

struct RunOptions {
  std::ostream* log = nullptr;  // progress lines; nullptr for silence
};

/// Executes the configured command, writing every artifact under
/// `config.out`. Returns 0 iff all asserted checks pass, 1 otherwise.
/// Throws std::runtime_error when the output directory is unusable.
int run(const RunConfig& config, const RunOptions& options = {});

/// The same, returning the report instead of only the status.
Report run_report(const RunConfig& config, const RunOptions& options = {});

}  // namespace cwlab
