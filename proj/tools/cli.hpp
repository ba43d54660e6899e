#pragma once

#include "coop_rag/error.hpp"
#include "coop_rag/evaluation.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace coop_rag::cli {

// Closed set of process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitValidation = 2,
  kExitBackend = 3,
};

int exit_code_for(const Error &error) noexcept;

// `args` excludes the program name. Logs go to `err`; with --json, `out`
// receives exactly one JSON document.
int run_cli(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err);

// Plain-text table of the aggregates and histogram.
std::string render_report_table(const AggregateMetrics &aggregates);
// One <rect> per non-empty bin.
std::string render_histogram_svg(const std::vector<HistogramBin> &bins);
std::vector<HistogramBin> parse_histogram_csv(const std::string &content);

} // namespace coop_rag::cli
