#pragma once

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logit_sue/operators.hpp"
#include "logit_sue/solvers.hpp"

namespace sue {

/// iter,rgap,residual_norm,aec,step_size,phase,wall_s. With zero_wall the
/// wall column is written as 0 so repeated runs compare byte for byte.
std::string trace_csv(const SolveRun& run, bool zero_wall = false);

/// Summary fields of a run; callers merge in the configuration echo.
nlohmann::json run_summary(const SolveRun& run);

nlohmann::json spectral_json(const SpectralReport& rep);

/// First iteration at which RGAP ≤ each gap, or empty when never reached.
std::vector<std::optional<int>> gap_milestones(const SolveRun& run, std::span<const double> gaps);

/// One path flow per line, full precision.
std::string write_flows(std::span<const double> h);
/// Blank lines and lines starting with '#' are skipped.
std::vector<double> parse_flows(std::string_view text);

std::string format_double(double v);

}  // namespace sue
