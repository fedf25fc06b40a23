#include "logit_sue/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "logit_sue/error.hpp"

namespace sue {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const SolveRun& run, bool zero_wall) {
  std::string out = "iter,rgap,residual_norm,aec,step_size,phase,wall_s\n";
  for (const auto& r : run.trace) {
    out += std::to_string(r.iter);
    out += ',' + format_double(r.rgap);
    out += ',' + format_double(r.residual_norm);
    out += ',' + format_double(r.aec);
    out += ',' + format_double(r.step_size);
    out += ',';
    out += phase_name(r.phase);
    out += ',' + format_double(zero_wall ? 0.0 : r.wall_s);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

}  // namespace

nlohmann::json run_summary(const SolveRun& run) {
  nlohmann::json j;
  j["method"] = std::string(method_name(run.method));
  j["converged"] = run.converged;
  j["termination"] = run.termination;
  if (!run.failure_reason.empty()) j["failure_reason"] = run.failure_reason;
  j["iterations"] = run.iterations();
  j["final_rgap"] = run.final_rgap();
  j["final_residual_norm"] = run.trace.empty() ? 0.0 : run.trace.back().residual_norm;
  j["final_aec"] = run.trace.empty() ? 0.0 : run.trace.back().aec;
  j["empirical_order"] = optional_number(run.empirical_order);
  j["observed_rate"] = optional_number(run.observed_rate);
  j["final_step"] = run.final_step;
  j["newton_attempts"] = run.newton_attempts;
  j["newton_accepted"] = run.newton_accepted;
  j["newton_iterations"] = run.newton_iterations;
  j["solve_seconds"] = run.solve_seconds;
  j["gap_weight_convention"] = "w_i = c_i + ln(h_i)/theta";
  return j;
}

nlohmann::json spectral_json(const SpectralReport& rep) {
  nlohmann::json j;
  j["eigenvalues_real"] = rep.eigenvalues_real;
  j["eigenvalues_imag"] = rep.eigenvalues_imag;
  j["lambda_min"] = rep.lambda_min;
  j["lambda_max"] = rep.lambda_max;
  j["s_g"] = rep.s_g;
  j["s_conservative"] = rep.s_conservative;
  j["theta"] = rep.theta;
  j["max_demand"] = rep.max_demand;
  j["complex_flagged"] = rep.complex_flagged;
  j["max_abs_imag"] = rep.max_abs_imag;
  j["method"] = rep.method;
  return j;
}

std::vector<std::optional<int>> gap_milestones(const SolveRun& run, std::span<const double> gaps) {
  std::vector<std::optional<int>> out(gaps.size());
  for (const auto& row : run.trace) {
    for (std::size_t g = 0; g < gaps.size(); ++g) {
      if (!out[g] && row.rgap <= gaps[g]) out[g] = row.iter;
    }
  }
  return out;
}

std::string write_flows(std::span<const double> h) {
  std::string out;
  for (const double x : h) out += format_double(x) + '\n';
  return out;
}

std::vector<double> parse_flows(std::string_view text) {
  std::vector<double> h;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw ParseError("expected one path flow per line, found '" + std::string(line) + "'",
                       line_no);
    }
    h.push_back(v);
  }
  return h;
}

}  // namespace sue
