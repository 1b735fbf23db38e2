#include "dpsens/errors.hpp"
#include "dpsens/instances.hpp"
#include "dpsens/io.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dpsens {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("dpsens_test_" + name); }

TEST(Io, MatrixRoundTrip) {
  Mat m(2, 3);
  m << 1.0 / 3.0, -2e-300, 5, 0, std::nextafter(1.0, 2.0), -7.25;
  EXPECT_EQ(io::matrix_from_json(io::matrix_to_json(m), "m"), m);
}

TEST(Io, QdpRoundTripIsBitExact) {
  std::mt19937_64 rng(41);
  const auto qdp = random_sosc_instance(rng, {6, 2, 3, 2, 0.5});
  const auto path = temp_file("qdp.json");
  io::write_json_file(path, io::to_json(qdp));
  const auto back = io::read_qdp_file(path);
  fs::remove(path);
  ASSERT_EQ(back.dims(), qdp.dims());
  for (int k = 0; k < 6; ++k) {
    const auto &a = qdp.stage(k), &b = back.stage(k);
    EXPECT_EQ(a.Q, b.Q);
    EXPECT_EQ(a.R, b.R);
    EXPECT_EQ(a.S, b.S);
    EXPECT_EQ(a.D1, b.D1);
    EXPECT_EQ(a.D2, b.D2);
    EXPECT_EQ(a.A, b.A);
    EXPECT_EQ(a.B, b.B);
    EXPECT_EQ(a.C, b.C);
  }
  EXPECT_EQ(back.terminal_Q(), qdp.terminal_Q());
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -1e-310, 6.02214076e23}) EXPECT_EQ(std::strtod(io::format_double(v).c_str(), nullptr), v);
}

TEST(Io, MalformedJson) {
  const auto path = temp_file("bad.json");
  {
    std::ofstream(path) << "{\"N\": 2, ";
  }
  EXPECT_THROW(io::read_json_file(path), ParseError);
  fs::remove(path);
  EXPECT_THROW(io::read_json_file(temp_file("missing.json")), ParseError);
}

TEST(Io, SchemaErrorsNameTheField) {
  const auto qdp = benchmark_qdp(3, 10, 1, BenchmarkDynamics::Linear);
  auto j = io::to_json(qdp);
  j["stages"][1]["R"] = "oops";
  try {
    io::qdp_from_json(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("R"), std::string::npos);
  }
  auto ragged = io::to_json(qdp);
  ragged["terminal_Q"] = io::json::array({io::json::array({1.0, 2.0}), io::json::array({1.0})});
  EXPECT_THROW(io::qdp_from_json(ragged), ParseError);
  auto wrong = io::to_json(qdp);
  wrong["stages"][0]["A"] = io::json::array({io::json::array({1.0, 2.0})});
  EXPECT_THROW(io::qdp_from_json(wrong), Error);
}

TEST(Io, ConvexifiedJsonHasShiftMatrices) {
  const auto qdp = benchmark_qdp(5, 10, 1, BenchmarkDynamics::Linear);
  const auto j = io::to_json(convexify(qdp, 4.5));
  EXPECT_EQ(j.at("delta").get<double>(), 4.5);
  EXPECT_EQ(j.at("Qbar").size(), 6u);
  EXPECT_EQ(io::qdp_from_json(j).dims(), qdp.dims());
}

TEST(Io, DecayCsv) {
  const auto qdp = benchmark_qdp(6, 10, 1, BenchmarkDynamics::Linear);
  const auto r = solve_sensitivity(qdp, unit_direction(qdp.dims(), 2, 0));
  std::ostringstream os;
  io::write_decay_csv(os, r, nullptr, 2);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "k,norm_p,norm_q,log_ratio,theory_bound");
  int rows = 0;
  while (std::getline(is, line)) {
    std::istringstream cells(line);
    std::string k, np, nq, lr, tb;
    std::getline(cells, k, ',');
    std::getline(cells, np, ',');
    std::getline(cells, nq, ',');
    std::getline(cells, lr, ',');
    std::getline(cells, tb, ',');
    EXPECT_EQ(std::stoi(k), rows);
    const double norm = std::max(std::stod(np), std::stod(nq));
    EXPECT_DOUBLE_EQ(std::stod(lr), norm > 0 ? std::max(std::log(norm), -500.0) : -500.0);
    EXPECT_TRUE(std::isnan(std::stod(tb)));
    ++rows;
  }
  EXPECT_EQ(rows, 7);
}

}  // namespace
}  // namespace dpsens
