#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cwlab/config.hpp"
#include "cwlab/heat_kernel.hpp"
#include "cwlab/limits.hpp"
#include "cwlab/walker.hpp"

namespace cwlab {

/// Outcome of one named check. Only asserted checks decide the exit status.
struct CheckSummary {
  std::string id;
  bool asserted = true;
  bool pass = false;
  double margin = kNaN;  // distance to the failure threshold, positive when passing
  std::string detail;
};

struct Report {
  std::string env_id;
  std::string command;
  LimitTargets targets;
  Tolerances tolerances;
  std::vector<VerificationRecord> records;
  std::vector<CheckSummary> summary;
  std::vector<EscapeEstimate> escapes;

  bool pass() const;
  /// "<id>: <detail>" for every asserted check that failed.
  std::vector<std::string> failures() const;
};

// Writers. All outputs use LF line endings, '.' decimals, shortest
// round-trip numbers and carry no timestamps.

void write_text(const std::filesystem::path& path, const std::string& content);

std::string energies_csv(const EnergySeq& e);
std::string snapshot_csv(const KernelState& s, const EnvWindow& window);
std::string occupancy_csv(const WalkEnsemble& ens);
std::string env_sample_csv(const Environment& env, std::int64_t lo, std::int64_t hi);
std::string escape_json(std::span<const EscapeEstimate> estimates);
std::string report_csv(std::span<const VerificationRecord> records);
std::string report_json(const Report& report);

/// One polyline plot per series: observed against n (log2 axis), plus a
/// dashed target line where the target is finite.
std::string series_svg(const std::string& title, std::span<const VerificationRecord> records);

/// Groups records into series by (theorem, delta) in first-seen order and
/// returns file stems such as "llt" or "regularity_delta0.25".
std::vector<std::pair<std::string, std::vector<VerificationRecord>>> group_series(
    std::span<const VerificationRecord> records);

}  // namespace cwlab
