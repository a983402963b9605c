#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "esqpt/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = esqpt::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("spectrum subcommand and manifest") {
  TempDir t("esqpt_cli_spectrum");
  const Run r = cli({"spectrum", "--lambda", "0", "--n", "3", "-o", t / "s.csv"});
  REQUIRE(r.code == 0);
  const auto rows = csv(t / "s.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][2] == "energy");
  const double expect[] = {0.0, 4.0, 4.0};
  for (int k = 0; k < 3; ++k) CHECK(std::stod(rows[k + 1][2]) == doctest::Approx(expect[k]).epsilon(1e-12));

  const auto m = nlohmann::json::parse(slurp(t / "s.csv.manifest.json"));
  CHECK(m["command"] == "spectrum");
  CHECK(m["seed"] == 1);
  CHECK(m["inputs"]["n"] == 3);
  CHECK(m["results"]["dimension"] == 3);
  CHECK(m["wall_time_s"].get<double>() >= 0.0);
  CHECK(m["rerun"].get<std::string>().find("--n 3") != std::string::npos);
}

TEST_CASE("boundary subcommand in JSON") {
  TempDir t("esqpt_cli_boundary");
  REQUIRE(cli({"boundary", "--beta0p", "1.7", "--lambda", "2", "--format", "json", "-o", t / "b.json"}).code == 0);
  const auto j = nlohmann::json::parse(slurp(t / "b.json"));
  REQUIRE(j["rows"].size() == 1);
  CHECK(j["columns"][1] == "e_min");
  CHECK(j["rows"][0][1].get<double>() == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(j["rows"][0][2].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("spinodal subcommand") {
  TempDir t("esqpt_cli_spinodal");
  REQUIRE(cli({"spinodal", "-o", t / "sp.csv"}).code == 0);
  const auto rows = csv(t / "sp.csv");
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(std::stod(rows[1][1]) - 0.707) <= 0.005);
  CHECK(std::abs(std::stod(rows[1][2]) - 4.0 / 3.0) <= 1e-3);
}

TEST_CASE("exit codes") {
  TempDir t("esqpt_cli_codes");
  CHECK(cli({}).code == 64);
  CHECK(cli({"no-such-command"}).code == 64);
  CHECK(cli({"spectrum", "--n", "three"}).code == 64);
  CHECK(cli({"spectrum", "--format", "xml"}).code == 64);
  CHECK(cli({"--help"}).code == 0);
  // domain errors
  CHECK(cli({"flow", "-o", t / "f.csv"}).code == 2);
  CHECK(cli({"spectrum", "--beta0p", "0", "--lambda", "0.5", "--n", "3", "-o", t / "x.csv"}).code == 2);
  CHECK(cli({"excited-surfaces", "--lambda", "1", "--n-gamma", "3", "-o", t / "e.csv"}).code == 2);
  // unwritable output
  const Run r = cli({"spinodal", "-o", t / "missing/dir/sp.csv"});
  CHECK(r.code == 74);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(t / "missing/dir/sp.csv.manifest.json"));
}

TEST_CASE("identical inputs give identical bytes") {
  TempDir t("esqpt_cli_bytes");
  const std::vector<std::string> base{"density-cut", "--lambda", "0.8", "--n-samples", "200000"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  REQUIRE(cli(with({"--seed", "7", "--threads", "1", "-o", t / "a.csv"})).code == 0);
  REQUIRE(cli(with({"--seed", "7", "--threads", "3", "-o", t / "b.csv"})).code == 0);
  CHECK(slurp(t / "a.csv") == slurp(t / "b.csv"));
  CHECK(slurp(t / "a_features.csv") == slurp(t / "b_features.csv"));
  REQUIRE(cli(with({"--seed", "8", "-o", t / "c.csv"})).code == 0);
  CHECK(slurp(t / "a.csv") != slurp(t / "c.csv"));
}

TEST_CASE("config file with flag override") {
  TempDir t("esqpt_cli_config");
  {
    std::ofstream cfg(t / "job.conf");
    cfg << "# spectrum job\nlambda=0\nn=3\n";
  }
  REQUIRE(cli({"spectrum", "--config", t / "job.conf", "-o", t / "a.csv"}).code == 0);
  CHECK(csv(t / "a.csv").size() == 4);
  REQUIRE(cli({"spectrum", "--config", t / "job.conf", "--n", "2", "-o", t / "b.csv"}).code == 0);
  CHECK(csv(t / "b.csv").size() == 3);
  {
    std::ofstream cfg(t / "bad.conf");
    cfg << "no-such-key=1\n";
  }
  CHECK(cli({"spectrum", "--config", t / "bad.conf", "-o", t / "c.csv"}).code == 64);
}

TEST_CASE("stationary census at one lambda") {
  TempDir t("esqpt_cli_stationary");
  REQUIRE(cli({"stationary", "--lambda", "0.2", "-o", t / "s.csv"}).code == 0);
  const auto rows = csv(t / "s.csv");
  REQUIRE(rows.size() >= 2);
  bool origin = false;
  for (std::size_t k = 1; k < rows.size(); ++k)
    origin = origin || (std::abs(std::stod(rows[k][1])) < 1e-9 && std::abs(std::stod(rows[k][2])) < 1e-9 && rows[k][7] == "i");
  CHECK(origin);
}
