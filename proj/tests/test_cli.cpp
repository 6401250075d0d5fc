#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace pqlap;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "pqlap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("pqlap_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& extra = "", int n = 150) {
  fs::path c = dir / "config.json";
  std::ofstream f(c);
  f << "{\"p\": 3, \"q\": 2, \"T\": 1, \"n\": " << n << ", \"seed\": 5, \"output_dir\": \"" << (dir / "out").string() << "\"" << extra
    << "}";
  return c;
}

std::vector<std::string> csv_rows(const fs::path& p) {
  std::vector<std::string> rows;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) rows.push_back(line);
  return rows;
}

}  // namespace

TEST_CASE("eig prints the eigenvalue", "[cli]") {
  Run r = run({"eig", "--r", "2", "--T", "3.14159265358979", "--k", "3"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(std::stod(r.out) - 9.0) < 1e-9);
}

TEST_CASE("eig writes eigenfunction samples", "[cli]") {
  Run r = run({"eig", "--r", "3", "--T", "1", "--k", "1", "--samples", "100"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 102);  // eigenvalue, header, 100 rows
  CHECK(lines[1] == "t,phi");
  auto value = [](const std::string& row) { return std::stod(row.substr(row.find(',') + 1)); };
  CHECK(std::abs(value(lines[2])) < 1e-12);
  CHECK(std::abs(value(lines.back())) < 1e-9);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
  Run r = run({"eig", "--r", "0.5", "--T", "1", "--k", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("ERROR ", 0) == 0);
  CHECK(r.err.find("r > 1") != std::string::npos);

  CHECK(run({"eig", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"solve", "--mode", "newton", "--alpha", "1", "--beta", "1"}).code == 2);

  fs::path d = scratch("usage");
  fs::path bad = d / "bad.json";
  std::ofstream(bad) << "{\"p\": 2, \"q\": 3}";
  Run c = run({"ratio", "--config", bad.string()});
  CHECK(c.code == 2);
  CHECK(c.err.find("ERROR USAGE") == 0);
  std::ofstream(d / "broken.json") << "{\"p\": ";
  CHECK(run({"ratio", "--config", (d / "broken.json").string()}).code == 2);
  std::ofstream(d / "tol.json") << "{\"tolerances\": {\"residual\": 0}}";
  CHECK(run({"ratio", "--config", (d / "tol.json").string()}).code == 2);
  CHECK(run({"ratio", "--config", (d / "missing.json").string()}).code == 2);
  CHECK(run({"solve", "--config", write_config(d).string(), "--alpha", "lambda2(x)", "--beta", "1"}).code == 2);
}

TEST_CASE("parameter expressions", "[cli]") {
  cli::RunConfig c;
  CHECK(cli::parse_parameter("12.5", c) == 12.5);
  CHECK(cli::parse_parameter("1.3*lambda2(p)", c) == 1.3 * eigenvalue(2, 3.0, 1.0));
  CHECK(cli::parse_parameter("lambda1(q)", c) == eigenvalue(1, 2.0, 1.0));
  CHECK_THROWS_AS(cli::parse_parameter("twelve", c), Error);
  CHECK_THROWS_AS(cli::parse_parameter("lambda0(p)", c), Error);
}

TEST_CASE("verify writes positive margins", "[cli]") {
  fs::path d = scratch("verify");
  fs::path cfg = write_config(d, ", \"p_grid\": [2, 3, 5], \"q_grid\": [1.5, 2, 2.5]");
  Run r = run({"verify", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(d / "out" / "margins.csv");
  REQUIRE(rows.size() == 1 + 7);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].back() == '1');
  auto summary = nlohmann::json::parse(slurp(d / "out" / "verify_summary.json"));
  CHECK(summary["violations"] == 0);
  CHECK(summary["min_lower_margin"].get<double>() > 0.0);
  CHECK(summary["min_upper_margin"].get<double>() > 0.0);
  CHECK(run({"verify-lemmas", "--config", cfg.string()}).code == 0);
}

TEST_CASE("ratio report", "[cli]") {
  fs::path d = scratch("ratio");
  Run r = run({"ratio", "--config", write_config(d).string()});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(slurp(d / "out" / "ratio.json"));
  double R = j["ratio"].get<double>();
  CHECK(R == rayleigh_ratio(3.0, 2.0, 1.0).value);  // 17 digits round-trip exactly
  CHECK(j["beta_upper_star_at_lambda_k_p"].size() == 4);
}

TEST_CASE("solve in both modes", "[cli]") {
  fs::path d = scratch("solve");
  fs::path cfg = write_config(d);
  Run r = run({"solve", "--config", cfg.string(), "--mode", "nehari", "--alpha", "1.3*lambda2(p)", "--beta", "lambda1(q)"});
  REQUIRE(r.code == 0);
  std::string report = slurp(d / "out" / "report.json");
  CHECK(report.find("\"nodal_domains\": 2") != std::string::npos);
  CHECK(csv_rows(d / "out" / "solution.csv").size() == 151);
  auto j = nlohmann::json::parse(report);
  CHECK(j["E"].get<double>() > 0.0);
  CHECK(j["residual"].get<double>() < 1e-6);

  fs::path d2 = scratch("solve_flow");
  Run f = run({"solve", "--config", write_config(d2).string(), "--mode", "flow", "--alpha", "0.5*lambda1(p)", "--beta",
               "1.5*lambda2(q)"});
  REQUIRE(f.code == 0);
  auto jf = nlohmann::json::parse(slurp(d2 / "out" / "report.json"));
  CHECK(jf["E"].get<double>() < 0.0);
  CHECK(jf["nodal_domains"].get<int>() >= 2);
  auto traj = csv_rows(d2 / "out" / "trajectory.csv");
  REQUIRE(traj.size() > 1);
  CHECK(traj[0] == "step,J,fixed_point_gap,cone");
  CHECK(fs::exists(d2 / "out" / "w1.csv"));
}

TEST_CASE("solver failure exits 1 and still writes the report", "[cli]") {
  fs::path d = scratch("fail");
  Run r = run({"solve", "--config", write_config(d).string(), "--mode", "flow", "--alpha", "0.5*lambda1(p)", "--beta",
               "0.9*lambda2(q)"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("ERROR PATH_NOT_NEGATIVE: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK(fs::exists(d / "out" / "report.json"));
}

TEST_CASE("curve output", "[cli]") {
  fs::path d = scratch("curve");
  Run r = run({"curve", "--config", write_config(d, "", 200).string(), "--which", "beta_L", "--alpha-min", "lambda2(p)",
               "--alpha-max", "4*lambda2(p)", "--steps", "30"});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(d / "out" / "curve_beta_L.csv");
  REQUIRE(rows.size() == 31);
  CHECK(rows[0] == "alpha,value,status");
  double prev = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream s(rows[i]);
    std::string a, v, st;
    std::getline(s, a, ',');
    std::getline(s, v, ',');
    std::getline(s, st, ',');
    CHECK(st == "OK");
    double val = std::stod(v);
    CHECK(val <= prev + 1e-6);
    prev = val;
  }
  Run u = run({"curve", "--config", write_config(d).string(), "--which", "beta_U", "--alpha-min", "0", "--alpha-max",
               "lambda2(p)", "--steps", "3"});
  CHECK(u.code == 0);
  auto urows = csv_rows(d / "out" / "curve_beta_U.csv");
  CHECK(urows[1].find("-inf") != std::string::npos);
  CHECK(urows[3].find("OK") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs", "[cli]") {
  std::vector<std::string> files = {"report.json", "solution.csv"};
  std::string first[2];
  for (int k = 0; k < 2; ++k) {
    fs::path d = scratch("det" + std::to_string(k));
    Run r = run({"solve", "--config", write_config(d).string(), "--mode", "nehari", "--alpha", "1.3*lambda2(p)", "--beta",
                 "lambda1(q)", "--random-starts", "3"});
    REQUIRE(r.code == 0);
    std::string joined;
    for (const auto& f : files) joined += slurp(d / "out" / f);
    first[k] = joined;
  }
  // the output directory differs, nothing else may
  CHECK(first[0] == first[1]);
}

TEST_CASE("numbers carry at least 15 significant digits", "[cli]") {
  fs::path d = scratch("digits");
  REQUIRE(run({"ratio", "--config", write_config(d).string()}).code == 0);
  std::string text = slurp(d / "out" / "ratio.json");
  auto j = nlohmann::json::parse(text);
  for (const char* key : {"ratio", "ratio_quadrature", "lambda1_q", "lambda2_q", "beta_L_star"}) {
    std::string k = std::string("\"") + key + "\": ";
    auto pos = text.find(k);
    REQUIRE(pos != std::string::npos);
    std::string num = text.substr(pos + k.size(), text.find_first_of(",\n", pos + k.size()) - pos - k.size());
    int digits = 0;
    bool leading = true;
    for (char ch : num) {
      if (ch == 'e' || ch == 'E') break;
      if (!std::isdigit(static_cast<unsigned char>(ch))) continue;
      if (leading && ch == '0') continue;
      leading = false;
      ++digits;
    }
    CHECK(digits >= 15);
  }
}

TEST_CASE("small atlas run writes every artifact", "[cli]") {
  fs::path d = scratch("atlas");
  fs::path cfg = write_config(d);
  Run r = run({"atlas", "--config", cfg.string(), "--resolution", "4", "--beta2-points", "0", "--probe-count", "2"});
  REQUIRE(r.code == 0);
  fs::path out = d / "out";
  auto rows = csv_rows(out / "atlas.csv");
  REQUIRE(rows.size() == 17);
  CHECK(rows[0] == "alpha,beta,verdict,rule,certificate_path,energy,residual,nodal_domains");
  for (const char* f : {"atlas_summary.json", "overlay_beta_L.csv", "overlay_spectrum.csv", "probes.csv"})
    CHECK(fs::exists(out / f));
  auto j = nlohmann::json::parse(slurp(out / "atlas_summary.json"));
  CHECK(j["invalid_certificates"] == 0);
  CHECK(j["probe_acceptances"] == 0);
  // every certificate named in the table exists and re-evaluates as claimed
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cols;
    std::stringstream s(rows[i]);
    std::string c;
    while (std::getline(s, c, ',')) cols.push_back(c);
    if (cols.size() < 5 || cols[4].empty()) continue;
    DiscreteFunction u = read_csv((out / cols[4]).string(), 1.0);
    FunctionalReport rep = evaluate(u, {3.0, 2.0, std::stod(cols[0]), std::stod(cols[1])});
    CHECK(rep.residual <= 1e-6);
    CHECK((cols[2] == "EXISTS_POS_ENERGY" ? rep.E > 0.0 : rep.E < 0.0));
  }
}
