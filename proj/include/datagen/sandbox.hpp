#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace datagen {

struct SandboxOptions {
    /// Interpreter command and leading arguments; the program file path is appended.
    std::vector<std::string> interpreter{"python3"};
    std::chrono::milliseconds timeout{10000};
    std::size_t output_cap = 64 * 1024;
    std::string file_name = "solver.py";
    /// Run the child in fresh user and network namespaces when the kernel allows it.
    bool isolate_network = true;
};

struct SandboxResult {
    std::string stdout_text;
    std::string stderr_text;
    /// Last nonempty stdout line, only for a clean exit without timeout.
    std::optional<std::string> candidate;
    /// Exit code, or -signal when killed by a signal.
    int exit_status = 0;
    bool timed_out = false;
    /// Output hit the cap and was cut.
    bool truncated = false;
    double wall_ms = 0;
    bool network_isolated = false;
    std::string error;

    bool ok() const { return candidate.has_value(); }
};

/// Writes `source` to a fresh temporary directory and runs the interpreter on it there with
/// a cleared environment (PATH, HOME and TMPDIR only), no core dumps, a file-size limit, its own
/// process group and, where possible, no network. The whole process group is killed on timeout.
/// The directory is removed afterwards.
SandboxResult execute_sandboxed(const std::string &source, const SandboxOptions &options = {});

} // namespace datagen
