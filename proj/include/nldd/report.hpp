#pragma once

// CSV and JSON serialization of MethodReport.
//
// CSV columns (fixed): n,error,residual,newton1,newton2,seconds
// The error field is empty when the run had no reference. With timing off
// the seconds column is written as 0 so that repeated runs are
// byte-identical.

#include "nldd/dd_iterations.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nldd {

inline constexpr const char* kCsvHeader = "n,error,residual,newton1,newton2,seconds";

/// Shortest round-trip decimal form, locale independent.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string report_csv(const MethodReport& report, bool record_timing = false);

struct RunSummary {
  Method method = Method::DirichletNeumann;
  double h = 0.0;
  double s = 0.0;
  std::optional<double> s2;  // NN only
  int iterations = 0;
  std::optional<double> final_error;
  std::optional<double> min_error;
  std::optional<double> fitted_L;
  Termination termination = Termination::MaxIterations;
  std::string problem;

  [[nodiscard]] bool converged() const noexcept { return termination == Termination::Converged; }
};

[[nodiscard]] RunSummary summarize(const MethodReport& report, double h, double s,
                                   std::optional<double> s2 = std::nullopt);

/// JSON array with one object per run:
/// {method, h, s, iterations, final_error, fitted_L, converged, non_converged,
///  min_error, termination, problem}. Missing values are null.
[[nodiscard]] std::string summaries_json(const std::vector<RunSummary>& runs);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace nldd
