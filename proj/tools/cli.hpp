#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace sdepca::cli {

/// Flat key/value settings. Keys use the long flag names without dashes,
/// e.g. "n-paths", "master-seed".
using Settings = std::map<std::string, std::string>;

/// Every key the config file and the flags understand.
const std::vector<std::string>& known_keys();

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed lines throw ValidationError.
Settings parse_config(const std::string& text);
Settings read_config_file(const std::string& path);

/// "2^-6", "0.015625" or "1/64"; must be a dyadic step.
double parse_step(const std::string& text);

/// Runs one subcommand. Data written to "-" goes to `out`; errors go to
/// `err` as `error_code=<name> detail=<text>`. Returns the exit status
/// (0 ok, 2 validation, 3 numerical failure, 1 other).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdepca::cli
