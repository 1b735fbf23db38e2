#include "dpsens/io.hpp"

#include "dpsens/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace dpsens::io {

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ParseError(field + ": expected a non-empty array of rows");
  const auto rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ParseError(field + ": rows must be non-empty arrays");
  const auto cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(field + ": row " + std::to_string(r) + " has inconsistent length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ParseError(field + ": entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

namespace {

json stage_to_json(const StageBlocks& s) {
  return json{{"Q", matrix_to_json(s.Q)},   {"R", matrix_to_json(s.R)},   {"S", matrix_to_json(s.S)},
              {"A", matrix_to_json(s.A)},   {"B", matrix_to_json(s.B)},   {"C", matrix_to_json(s.C)},
              {"D1", matrix_to_json(s.D1)}, {"D2", matrix_to_json(s.D2)}};
}

int int_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw ParseError(std::string("dims.") + key + ": expected an integer");
  }
  return j[key].get<int>();
}

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
  return j[key];
}

}  // namespace

json to_json(const QdpProblem& qdp) {
  const auto& d = qdp.dims();
  json stages = json::array();
  for (const auto& s : qdp.stages()) stages.push_back(stage_to_json(s));
  return json{{"dims", {{"N", d.N}, {"nx", d.nx}, {"nu", d.nu}, {"nd", d.nd}}},
              {"stages", std::move(stages)},
              {"terminal_Q", matrix_to_json(qdp.terminal_Q())}};
}

QdpProblem qdp_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("top level: expected a JSON object");
  const json& jd = field(j, "dims", "top level");
  const Dims dims{int_field(jd, "N"), int_field(jd, "nx"), int_field(jd, "nu"), int_field(jd, "nd")};
  const json& js = field(j, "stages", "top level");
  if (!js.is_array()) throw ParseError("stages: expected an array");
  std::vector<StageBlocks> stages;
  for (std::size_t k = 0; k < js.size(); ++k) {
    const std::string where = "stages[" + std::to_string(k) + "]";
    const json& e = js[k];
    StageBlocks s;
    s.Q = matrix_from_json(field(e, "Q", where), where + ".Q");
    s.R = matrix_from_json(field(e, "R", where), where + ".R");
    s.S = matrix_from_json(field(e, "S", where), where + ".S");
    s.A = matrix_from_json(field(e, "A", where), where + ".A");
    s.B = matrix_from_json(field(e, "B", where), where + ".B");
    s.C = matrix_from_json(field(e, "C", where), where + ".C");
    s.D1 = matrix_from_json(field(e, "D1", where), where + ".D1");
    s.D2 = matrix_from_json(field(e, "D2", where), where + ".D2");
    stages.push_back(std::move(s));
  }
  const Mat QN = matrix_from_json(field(j, "terminal_Q", "top level"), "terminal_Q");
  return QdpProblem(dims, std::move(stages), QN);
}

json to_json(const ConvexifiedQdp& conv) {
  json j = to_json(conv.problem);
  j["delta"] = conv.delta;
  json qbar = json::array();
  for (const auto& m : conv.Qbar) qbar.push_back(matrix_to_json(m));
  j["Qbar"] = std::move(qbar);
  j["semidefinite"] = conv.semidefinite;
  j["warnings"] = conv.warnings;
  return j;
}

json to_json(const BoundsReport& b) {
  return json{{"gamma", b.gamma},
              {"delta", b.delta},
              {"upsilon", b.upsilon},
              {"t", b.t},
              {"lambda_C", b.lambda_C},
              {"psi", b.psi},
              {"upsilon_Qbar", b.upsilon_Qbar},
              {"upsilon_tilde", b.upsilon_tilde},
              {"lambda_BCS", b.lambda_BCS},
              {"lambda_H", b.lambda_H},
              {"upsilon_tilde_Qbar", b.upsilon_tilde_Qbar},
              {"upsilon_E", b.upsilon_E},
              {"rho", b.rho},
              {"upsilon_data", b.upsilon_data},
              {"upsilon_P", b.upsilon_P},
              {"upsilon_u", b.upsilon_u},
              {"upsilon_f", b.upsilon_f},
              {"upsilon_uf", b.upsilon_uf},
              {"upsilon_p", b.upsilon_p},
              {"upsilon_pq1", b.upsilon_pq1},
              {"upsilon_pq2", b.upsilon_pq2},
              {"upsilon_pq", b.upsilon_pq}};
}

json to_json(const ControllabilityReport& c) {
  json tk = json::array();
  for (const auto& t : c.t_k) tk.push_back(t ? json(*t) : json(nullptr));
  return json{{"t_k", std::move(tk)},
              {"gramian_min_eig", c.gramian_min_eig},
              {"t", c.t},
              {"lambda_C", c.lambda_C},
              {"pass", c.pass}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ParseError("write failed for " + path.string());
}

QdpProblem read_qdp_file(const std::filesystem::path& path) {
  try {
    return qdp_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_decay_csv(std::ostream& os, const SensitivityResult& r, const BoundsReport* bounds, int source_stage) {
  os << "k,norm_p,norm_q,log_ratio,theory_bound\n";
  const auto norms = r.stage_norms();
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const double lr = norms[k] > 0.0 ? std::max(std::log(norms[k]), -500.0) : -500.0;
    const double bound = bounds ? bounds->decay_bound(source_stage, static_cast<int>(k)) : NAN;
    os << k << ',' << format_double(r.norm_p[k]) << ',' << format_double(r.norm_q[k]) << ','
       << format_double(lr) << ',' << format_double(bound) << '\n';
  }
}

}  // namespace dpsens::io
