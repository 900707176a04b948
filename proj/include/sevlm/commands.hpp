#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "sevlm/run_config.hpp"

namespace sevlm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int cmd_validate_data(const std::filesystem::path& path, std::ostream& out, std::ostream& err);
int cmd_stats(const std::filesystem::path& path, std::string_view weights, std::ostream& out, std::ostream& err);
int cmd_synth(const std::array<std::size_t, 3>& sizes, std::uint64_t seed, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err);
int cmd_train(const std::filesystem::path& config, const RunOverrides& overrides, std::ostream& out,
              std::ostream& err);
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data, std::ostream& out,
             std::ostream& err);
int cmd_gradcheck(std::size_t trials, double tolerance, std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_generate(const std::filesystem::path& checkpoint, std::string_view prompt, std::size_t max_new,
                 std::ostream& out, std::ostream& err);

/// Parses `argv` and dispatches to one of the commands above. Usage errors return 2.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sevlm
