#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "modham/modular.hpp"

namespace modham::cli {

/// Malformed or inconsistent run configuration (exit code 3).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum ExitCode { kSuccess = 0, kSelfcheckFailed = 1, kSpectralFailure = 2, kConfigFailure = 3 };

/// One (N, b, digits) rung of a convergence ladder.
struct Rung {
  int cells = 0;
  std::string half_width;
  int digits = 0;
};

/// Run configuration. Numbers that enter the computation are kept as the
/// decimal strings the user wrote, so they are parsed at the working
/// precision of each run and echoed verbatim.
struct RunConfig {
  std::string region = "interval";
  std::string edge = "0";
  std::string left = "-1";
  std::string right = "1";
  bool complement = false;
  std::vector<std::string> masses{"1"};
  int cells = 64;
  std::string half_width = "4";
  int digits = 300;
  std::string mode = "split";
  std::optional<std::string> sigma;
  std::vector<std::string> mus;
  std::optional<std::string> mu_range;
  std::string out = "-";
  bool full_precision = false;
  /// Skips the b >= 2 max|boundary| box-size check.
  bool allow_small_box = false;
  std::vector<Rung> rungs;
};

/// Defaults, with the digits taken from MODHAM_DIGITS when set.
RunConfig default_config();

/// Sets one key (the long flag name without dashes). List-valued keys
/// (mass, mu, rung) take comma-separated values and replace the list.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; `#` starts a comment.
void load_config_file(RunConfig& config, const std::string& path);

/// Ordered key/value echo of the configuration.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& config);

/// Checks ranges, parses every number and builds the basis of each
/// (N, b) combination that will run; throws ConfigError.
void validate(const RunConfig& config);

/// "lo:hi:step", inclusive of hi when it falls on the lattice.
std::vector<Real> parse_mu_range(const PrecisionContext& ctx, const std::string& text);

/// Sorted probe centres from --mu and --mu-range.
std::vector<Real> probe_centres(const PrecisionContext& ctx, const RunConfig& config);

RegionSpec make_region(const PrecisionContext& ctx, const RunConfig& config);

/// 0.05 times the region extent (the in-box length for a wedge) unless
/// sigma was given.
Real probe_width(const PrecisionContext& ctx, const RunConfig& config);

/// Value for a CSV field: 30 significant digits, or all of them.
std::string format_value(const Real& x, bool full_precision);

/// Output path for one mass of a ladder: `stem_m<mass>.ext` when several
/// masses are given, the configured path otherwise.
std::string output_path_for_mass(const RunConfig& config, const std::string& mass);

int cmd_kernel(const RunConfig& config, std::ostream& progress);
int cmd_scan(const RunConfig& config, std::ostream& progress);
int cmd_converge(const RunConfig& config, std::ostream& progress);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfcheckOptions {
  int digits = 50;
  /// Forwarded to the quadrature stopping rule; values far above 1 make it
  /// stop early (fault injection).
  double tolerance_scale = 1.0;
};

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options, std::ostream& progress);
int cmd_selfcheck(const SelfcheckOptions& options, std::ostream& out, std::ostream& progress);

}  // namespace modham::cli
