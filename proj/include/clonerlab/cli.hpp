#ifndef CLONERLAB_CLI_HPP
#define CLONERLAB_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace clonerlab::cli {

// Exit statuses shared by every subcommand.
constexpr int kExitClean = 0;     // success / nothing found
constexpr int kExitInfected = 1;  // detect/scan found infections
constexpr int kExitError = 2;     // usage or I/O error

// Structured reports carry this version marker.
constexpr int kReportVersion = 1;

// Runs `clonerlab <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clonerlab::cli

#endif
