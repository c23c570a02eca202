#include "nldd/report.hpp"

#include "nldd/errors.hpp"

#include "json.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace nldd {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf.data(), end);
}

std::string report_csv(const MethodReport& report, bool record_timing) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : report.records) {
    out += std::to_string(r.n);
    out += ',';
    if (r.error) out += format_double(*r.error);
    out += ',';
    out += format_double(r.residual);
    out += ',';
    out += std::to_string(r.newton1);
    out += ',';
    out += std::to_string(r.newton2);
    out += ',';
    out += record_timing ? format_double(r.seconds) : "0";
    out += '\n';
  }
  return out;
}

RunSummary summarize(const MethodReport& report, double h, double s, std::optional<double> s2) {
  RunSummary out;
  out.method = report.method;
  out.h = h;
  out.s = s;
  out.s2 = s2;
  out.iterations = report.iterations();
  out.final_error = report.final_error();
  out.min_error = report.min_error();
  out.fitted_L = fitted_convergence_factor(report);
  out.termination = report.termination;
  return out;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string summaries_json(const std::vector<RunSummary>& runs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json j;
    j["method"] = to_string(r.method);
    j["h"] = r.h;
    j["s"] = r.s;
    if (r.s2) j["s2"] = *r.s2;
    j["iterations"] = r.iterations;
    j["final_error"] = optional_number(r.final_error);
    j["fitted_L"] = optional_number(r.fitted_L);
    j["converged"] = r.converged();
    j["non_converged"] = !r.converged();
    j["min_error"] = optional_number(r.min_error);
    j["termination"] = to_string(r.termination);
    if (!r.problem.empty()) j["problem"] = r.problem;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
    os << content;
    if (!os.flush()) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace nldd
