// ndrstats
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("ndrstats_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path out = work_dir() / ("stdout_" + std::to_string(counter));
  const fs::path err = work_dir() / ("stderr_" + std::to_string(counter));
  ++counter;
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += "'" NDR_CLI_PATH "' " + args + " > '" + out.string() + "' 2> '" +
         err.string() + "'";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

struct Csv {
  std::vector<std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      csv.meta.push_back(line);
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!saw_header) {
      csv.header = fields;
      saw_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(std::strtod(f.c_str(), nullptr));
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

bool has_meta(const Csv& csv, const std::string& line) {
  for (const auto& m : csv.meta)
    if (m == line) return true;
  return false;
}

double column_mean(const Csv& csv, std::size_t col) {
  double s = 0.0;
  for (const auto& row : csv.rows) s += row[col];
  return s / static_cast<double>(csv.rows.size());
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("").code == 2);               // a subcommand is required
  CHECK(run_cli("frobnicate").code == 2);     // unknown subcommand
  CHECK(run_cli("pdf bogus").code == 2);      // invalid pdf target
  CHECK(run_cli("pdf ndr --points 1").code == 2);
  CHECK(run_cli("moments --orders 9").code == 2);
  CHECK(run_cli("sample ndr -n 0").code == 2);
  CHECK(run_cli("sample ndr --rho 0.5 --rho-z 0.5 -n 10").code == 2);
  CHECK(run_cli("sample ndr --format yaml -n 10").code == 2);
}

TEST_CASE("exit codes map the error taxonomy") {
  // domain misuse: densities need k >= 1
  CHECK(run_cli("pdf ndr --k 0.5").code == 2);
  // domain misuse: the exact sampler needs integer k
  CHECK(run_cli("sample gamma --k 2.5 -n 10").code == 2);
  // series budget exhaustion deep in the hypergeometric evaluation
  const auto conv = run_cli("moments --k 1 --rho 0.99999999");
  CHECK(conv.code == 3);
  CHECK(conv.err.find("ndr_moment") != std::string::npos);
  // unwritable output path
  CHECK(run_cli("sample ndr -n 10 --out /nonexistent_dir_zz/x.csv").code == 4);
}

TEST_CASE("pdf ndr emits the flat law for k = 1, rho = 0") {
  const auto r = run_cli("pdf ndr --k 1 --rho 0 --points 11");
  REQUIRE(r.code == 0);
  const auto csv = parse_csv(r.out);
  CHECK(csv.header == std::vector<std::string>{"r", "pdf"});
  REQUIRE(csv.rows.size() == 11);
  CHECK(csv.rows.front()[0] == 0.0);
  CHECK(csv.rows.back()[0] == 1.0);
  for (const auto& row : csv.rows) CHECK(std::abs(row[1] - 1.0) <= 1e-12);
  CHECK(has_meta(csv, "# command = pdf"));
  CHECK(has_meta(csv, "# k = 1.0"));
}

TEST_CASE("pdf ratio includes the unit-ratio reference point") {
  const auto r = run_cli("pdf ratio --k 1 --rho 0 --points 10 --z-max 10");
  REQUIRE(r.code == 0);
  const auto csv = parse_csv(r.out);
  CHECK(csv.header == std::vector<std::string>{"z", "pdf"});
  REQUIRE(csv.rows.size() == 10);
  CHECK(csv.rows.front()[0] == 1.0);  // grid starts above z = 0
  CHECK(std::abs(csv.rows.front()[1] - 0.25) <= 1e-12);
}

TEST_CASE("pdf joint-gamma grid carries unit mass") {
  const auto r = run_cli(
      "pdf joint-gamma --k 12 --rho 0.64 --sigma 2.88 --points 121 --x-max 120");
  REQUIRE(r.code == 0);
  const auto csv = parse_csv(r.out);
  CHECK(csv.header == std::vector<std::string>{"x1", "x2", "pdf"});
  REQUIRE(csv.rows.size() == 121 * 121);
  const double h = 120.0 / 120.0;
  auto w = [](long i) { return i == 0 || i == 120 ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (const auto& row : csv.rows) {
    const long i = std::lround(row[0] / h);
    const long j = std::lround(row[1] / h);
    sum += w(i) * w(j) * row[2];
  }
  sum *= (h / 3.0) * (h / 3.0);  // tensor Simpson weights
  CHECK(std::abs(sum - 1.0) <= 1e-3);
}

TEST_CASE("moments table with analytic and Monte-Carlo columns") {
  const auto r = run_cli("moments --k 1 --rho 0 --orders 0,1,2");
  REQUIRE(r.code == 0);
  const auto csv = parse_csv(r.out);
  CHECK(csv.header ==
        std::vector<std::string>{"m", "analytic_f1", "analytic_f2",
                                 "analytic_f3"});
  REQUIRE(csv.rows.size() == 3);
  CHECK(std::abs(csv.rows[1][2] - 0.5) <= 1e-12);
  CHECK(std::abs(csv.rows[2][2] - 1.0 / 3.0) <= 1e-12);

  const auto mc =
      run_cli("moments --k 2 --rho 0.3 --orders 1,2 --mc -n 100000 --seed 5");
  REQUIRE(mc.code == 0);
  const auto mcsv = parse_csv(mc.out);
  REQUIRE(mcsv.header.size() == 7);
  CHECK(mcsv.header[4] == "mc_estimate");
  CHECK(mcsv.header[6] == "mc_within_4se");
  for (const auto& row : mcsv.rows) {
    CHECK(row[6] == 1.0);
    CHECK(std::abs(row[4] - row[2]) <= 4.0 * row[5] + 1e-12);
  }
}

TEST_CASE("sample ndr: flat-law mean and full determinism") {
  const std::string args = "sample ndr --k 1 --rho 0 -n 1000000 --seed 1";
  const auto a = run_cli(args);
  REQUIRE(a.code == 0);
  const auto csv = parse_csv(a.out);
  CHECK(csv.header == std::vector<std::string>{"d"});
  REQUIRE(csv.rows.size() == 1000000);
  CHECK(std::abs(column_mean(csv, 0) - 0.5) <= 0.002);

  // identical bytes run to run, and independent of the worker count
  const auto b = run_cli(args);
  CHECK(a.out == b.out);
  const auto w1 = run_cli(args, "NDR_STATS_THREADS=1");
  const auto w8 = run_cli(args, "NDR_STATS_THREADS=8");
  CHECK(w1.out == a.out);
  CHECK(w8.out == a.out);
}

TEST_CASE("sample gamma: marginal means match k sigma") {
  const auto r =
      run_cli("sample gamma --k 12 --sigma 2.88 --rho 0.64 -n 200000 --seed 2");
  REQUIRE(r.code == 0);
  const auto csv = parse_csv(r.out);
  CHECK(csv.header == std::vector<std::string>{"x1", "x2"});
  REQUIRE(csv.rows.size() == 200000);
  const double se = 2.88 * std::sqrt(12.0) / std::sqrt(200000.0);
  CHECK(std::abs(column_mean(csv, 0) - 34.56) <= 5.0 * se);
  CHECK(std::abs(column_mean(csv, 1) - 34.56) <= 5.0 * se);
  CHECK(has_meta(csv, "# kind = gamma"));
}

TEST_CASE("sample complex accepts field-level parameters and echoes both") {
  const auto r =
      run_cli("sample complex --sigma-z 0.7 --rho-z 0.8 -n 1000 --seed 3");
  REQUIRE(r.code == 0);
  const auto csv = parse_csv(r.out);
  CHECK(csv.header ==
        std::vector<std::string>{"z1_re", "z1_im", "z2_re", "z2_im"});
  REQUIRE(csv.rows.size() == 1000);
  CHECK(has_meta(csv, "# sigma_z = 0.7"));
  CHECK(has_meta(csv, "# rho_z = 0.8"));
  CHECK(has_meta(csv, "# rho = 0.6400000000000001"));  // derived echo
  CHECK(has_meta(csv, "# parameterization = field"));
}

TEST_CASE("sample writes to a file when asked") {
  const fs::path out = work_dir() / "batch.csv";
  const auto r = run_cli("sample ndr --k 1 --rho 0 -n 100 --seed 7 --out '" +
                         out.string() + "'");
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto csv = parse_csv(slurp(out));
  CHECK(csv.rows.size() == 100);
}

TEST_CASE("json output mirrors the csv tables") {
  const auto r = run_cli("pdf ndr --k 1 --rho 0 --points 5 --format json");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["meta"]["command"] == "pdf");
  CHECK(j["meta"]["k"] == 1.0);
  CHECK(j["columns"] == nlohmann::json({"r", "pdf"}));
  REQUIRE(j["rows"].size() == 5);
  for (const auto& row : j["rows"])
    CHECK(std::abs(row[1].get<double>() - 1.0) <= 1e-12);
}

TEST_CASE("validate passes clean and fails under fault injection") {
  const auto good = run_cli("validate --quick --seed 4242");
  REQUIRE(good.code == 0);
  const auto j = nlohmann::json::parse(good.out);
  CHECK(j["pass"] == true);
  CHECK(j["n"] == 100000);
  CHECK(j["quick"] == true);
  REQUIRE(j["checks"].size() == 5);
  std::vector<std::string> names;
  for (const auto& c : j["checks"]) {
    names.push_back(c["name"].get<std::string>());
    CHECK(c["pass"] == true);
  }
  CHECK(names == std::vector<std::string>{"correlation_curve", "histogram_fits",
                                          "moment_consistency",
                                          "formulation_equivalence",
                                          "normalization"});

  const auto bad = run_cli("validate --quick --seed 4242 --perturb-pdf 0.05");
  CHECK(bad.code == 1);
  const auto bj = nlohmann::json::parse(bad.out);
  CHECK(bj["pass"] == false);
  CHECK(bad.err.find("failed checks") != std::string::npos);
  CHECK(bad.err.find("histogram_fits") != std::string::npos);
}

TEST_CASE("figure data tables") {
  const auto f1 = run_cli("figures --which 1 -n 50000 --seed 9");
  REQUIRE(f1.code == 0);
  const auto c1 = parse_csv(f1.out);
  CHECK(c1.header == std::vector<std::string>{"rho_z", "empirical_corr",
                                              "theory_rho_z2"});
  REQUIRE(c1.rows.size() == 20);
  for (const auto& row : c1.rows) {
    CHECK(row[2] == row[0] * row[0]);
    CHECK(std::abs(row[1] - row[2]) <= 0.03);
  }

  const auto f8 = run_cli("figures --which 8");
  REQUIRE(f8.code == 0);
  const auto c8 = parse_csv(f8.out);
  CHECK(c8.header == std::vector<std::string>{"k", "m1", "m2", "m3", "m4"});
  REQUIRE(c8.rows.size() == 16);
  for (std::size_t col = 1; col <= 4; ++col)
    for (std::size_t i = 1; i < c8.rows.size(); ++i)
      CHECK(c8.rows[i][col] < c8.rows[i - 1][col]);

  CHECK(run_cli("figures --which 99").code == 2);

  const fs::path out = work_dir() / "fig.csv";
  const auto multi =
      run_cli("figures --which 1,8 -n 20000 --out '" + out.string() + "'");
  REQUIRE(multi.code == 0);
  CHECK(fs::exists(work_dir() / "fig_fig1.csv"));
  CHECK(fs::exists(work_dir() / "fig_fig8.csv"));
}
