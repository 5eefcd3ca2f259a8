#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace gibbsinv::cli {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kInadmissible = 2,
    kNoConvergence = 3,
    kVerifyFailed = 4,
    kUsage = 64,
};

struct GlobalOptions {
    std::optional<std::filesystem::path> out;  // default: current directory (verify: <solve dir>/verify)
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool force = false;
};

int cmd_solve(const std::filesystem::path& config, const GlobalOptions& g, std::ostream& log);
int cmd_forward(const std::filesystem::path& config, const GlobalOptions& g, std::ostream& log);
int cmd_simulate(const std::filesystem::path& config, const GlobalOptions& g, std::ostream& log);
/// `target` is a solve output directory or a JSON config naming one (`solve_dir`).
int cmd_verify(const std::filesystem::path& target, const GlobalOptions& g, std::ostream& log);
int cmd_ursell(const std::filesystem::path& config, const GlobalOptions& g, std::ostream& log);
int cmd_probe(const std::filesystem::path& config, const GlobalOptions& g, std::ostream& log);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gibbsinv::cli
