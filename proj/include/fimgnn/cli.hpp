#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fimgnn {

/// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Accepts "a..b" (inclusive), a comma list, or a single integer.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Comma-separated numbers.
std::vector<double> parse_double_list(const std::string& text);

/// Entry point shared by the executable and the tests. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fimgnn
