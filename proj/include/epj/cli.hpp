#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "epj/serialize.hpp"

namespace epj::cli {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kSolverFailure = 3 };

/// Thrown for malformed configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

struct RunConfig {
    ModelParams model = ModelParams::one_level(-0.13, 0.1);
    FreeParam free_param = FreeParam::EpsA;
    double scan_start = -0.2;
    double scan_stop = -0.05;
    int scan_steps = 61;
    double ep_lo = -0.3;    ///< EP search bracket for the free parameter
    double ep_hi = 0.3;
    int ep_steps = 61;
    Complex c{1.0, 0.0};
    std::vector<double> eps_list{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> puiseux_eps{1e-6, -1e-6, 1e-5, -1e-5, 1e-4, -1e-4, 1e-3, -1e-3, 1e-2, -1e-2};
    std::vector<double> quotient_eps{1e-6, 4e-6, 1.6e-5};
    std::map<std::string, double> tolerances; ///< tol.<name> overrides; "all" applies to every check
};

/// Applies one key = value setting. Unknown keys and bad values throw
/// ConfigError.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses a key = value file body ('#' comments, blank lines ignored).
RunConfig parse_config(std::string_view text, RunConfig base = {});

/// Checks the RunConfig invariants (steps >= 2, c != 0, positive tolerances,
/// model parameters valid for the free parameter).
void validate(const RunConfig& cfg);

/// "1", "-2.5", "2-3i", "i", "0.5+0.25i" or "re,im".
Complex parse_complex(std::string_view text);

/// Number of scan threads: EP_JORDAN_THREADS if set and positive, else the
/// hardware concurrency.
unsigned scan_threads();

std::vector<ScanRow> run_scan(const RunConfig& cfg, unsigned threads);

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string skipped; ///< reason, empty when the check ran
};

std::vector<CheckResult> run_verify(const RunConfig& cfg);

/// Full command-line entry point. Returns the process exit code; output goes
/// to the --out file (stdout when absent or "-") and errors to `err` as JSON.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace epj::cli
