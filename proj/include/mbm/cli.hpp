#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mbm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `mbm` tool; args excludes the program name. Returns
/// 0 on success, 1 on domain or verdict failure, 2 on usage or parse errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "64, 128,256" -> {64, 128, 256}; std::invalid_argument on empty or malformed input.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace mbm
