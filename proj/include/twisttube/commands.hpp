#pragma once

#include <iosfwd>
#include <string>

#include "twisttube/bound.hpp"
#include "twisttube/config.hpp"
#include "twisttube/direct3d.hpp"

namespace twisttube {

// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitVerifyFail = 3,
};

// Each command reads a validated config, writes its files under
// config.output_dir and prints a short summary to `out`. Library errors
// propagate; run_command maps them to exit codes.
int cmd_cross_section(const RunConfig& config, std::ostream& out);
int cmd_bound(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_direct(const RunConfig& config, std::ostream& out);

// Dispatches by name and converts exceptions into exit codes, printing the
// message to `err`: 2 for configuration errors (bad keys, InvalidSpec,
// InvalidC, SigmaOutOfRange, TruncationTooSmall), 1 for everything else.
int run_command(const std::string& name, const RunConfig& config, std::ostream& out,
                std::ostream& err);

// Config pieces handed to the library modules.
TwistProfile make_profile(const RunConfig& config);
EigenOptions make_eigen_options(const RunConfig& config);
BoundConfig make_bound_config(const RunConfig& config);
DirectConfig make_direct_config(const RunConfig& config);

// JSON documents written into report.json, exposed for the bindings.
std::string bound_report_json(const BoundReport& report);
std::string direct_result_json(const DirectResult& result);

// Log-log least-squares slope of y over x; pairs with a non-positive entry
// are skipped. NaN with fewer than two usable pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace twisttube
