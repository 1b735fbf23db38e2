#pragma once

#include "dpsens/convexify.hpp"
#include "dpsens/model.hpp"
#include "dpsens/sensitivity.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dpsens::io {

using json = nlohmann::json;

json matrix_to_json(const Mat& m);
/// Expects a non-empty array of equally long numeric rows.
Mat matrix_from_json(const json& j, const std::string& field);

json to_json(const QdpProblem& qdp);
QdpProblem qdp_from_json(const json& j);

/// QDP schema of the convexified blocks plus "delta" and "Qbar" (N + 1 matrices).
json to_json(const ConvexifiedQdp& conv);
json to_json(const BoundsReport& b);
json to_json(const ControllabilityReport& c);

/// Throws ParseError with the offending position or field.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
QdpProblem read_qdp_file(const std::filesystem::path& path);

/// 17 significant digits, so every finite double round-trips.
std::string format_double(double v);

/// Header `k,norm_p,norm_q,log_ratio,theory_bound`, one row per stage k = 0..N.
/// log_ratio = log(max(norm_p, norm_q)) clamped below at -500.
void write_decay_csv(std::ostream& os, const SensitivityResult& r, const BoundsReport* bounds, int source_stage);

}  // namespace dpsens::io
