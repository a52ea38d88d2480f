#pragma once

// One entry point per CLI subcommand. Each reads what it needs from the
// configuration, writes its outputs into out_dir (created if missing) and
// throws UsageError / NumericalError on failure.

#include "core/config.hpp"

#include <string>

namespace berkson {

/// data.csv + manifest.json
void run_simulate(const RunConfig& cfg, const std::string& out_dir);
/// fit.json + curves.csv + densities.csv
FitResult run_fit(const RunConfig& cfg, const std::string& input, const std::string& out_dir);
/// naive.json + curves.csv
void run_naive(const RunConfig& cfg, const std::string& input, const std::string& out_dir);
/// selection.csv + selection.json
SelectionResult run_select(const RunConfig& cfg, const std::string& input, const std::string& out_dir);
/// report.csv + manifest.json
ReplicationReport run_replicate(const RunConfig& cfg, const std::string& out_dir);
/// diagnostics.json; returns false when the recovery misses its tolerance
/// (the diagnostics are written either way).
bool run_spectral_check(const RunConfig& cfg, const std::string& out_dir);

} // namespace berkson
