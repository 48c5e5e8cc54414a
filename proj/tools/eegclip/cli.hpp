#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eegclip::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvariant = 3;

const std::vector<std::string>& commands();

struct Options {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> input;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> bank;
  std::optional<std::size_t> grid;
};

/// Runs one command. Progress goes to `log`, diagnostics to `err`.
int execute(const Options& opts, std::ostream& log, std::ostream& err);

/// Parses argv and dispatches to execute().
int main_entry(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace eegclip::cli
