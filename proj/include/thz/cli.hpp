// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_CLI_HPP
#define THZ_CLI_HPP

#include "thz/errors.hpp"
#include "thz/harness.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace thz::cli
{

inline constexpr const char *kVersion = "0.1.0";

enum ExitCode : int
{
    kOk = 0,
    kInternal = 1,
    kConfig = 2,
    kNumerical = 3,
    kScenario = 4
};

// Stable mapping from library error codes to exit codes.
int exit_code(ErrorCode code) noexcept;

// Writes `content` to `path` through a sibling temp file and a rename.
void write_atomic(const std::string &path, const std::string &content);

// Floor used for zero and sub-floor BER values on the log axis.
inline constexpr double kPlotFloor = 1e-9;

// Log-BER versus SNR chart, one polyline per (detector, stream, source).
std::string render_svg(const std::vector<BerRecord> &records, const std::string &title);

// Entry point of the thzsim tool; returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace thz::cli

#endif
