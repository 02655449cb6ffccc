#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* bin = std::getenv("FRINGELAB_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("fringelab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = binary() + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("version flag") {
  const auto log = work_dir() / "version.txt";
  CHECK(run("--version", log.string()) == 0);
  CHECK(slurp(log).find("fringelab 0.1.0") != std::string::npos);
}

TEST_CASE("unknown inputs exit nonzero with a message") {
  const auto log = work_dir() / "bad.txt";
  CHECK(run("scan --input 12 --ideal --out " + (work_dir() / "x").string(),
            log.string()) != 0);
  CHECK(slurp(log).find("error") != std::string::npos);
  CHECK(run("nonsense") != 0);
  CHECK(run("fit --data " + (work_dir() / "missing.csv").string() + " --out " +
            (work_dir() / "y").string()) != 0);
}

TEST_CASE("ideal pair scan matches the closed form and carries the analytic column") {
  const auto prefix = work_dir() / "scan11";
  REQUIRE(run("scan --input 11 --ideal --points 41 --out " + prefix.string()) == 0);
  const auto rows = csv_rows(prefix.string() + ".csv");
  REQUIRE(rows.size() == 41);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 3);  // phi, prob, analytic
    // the CSV stores 12 significant digits, so the parsed phi carries ~1e-11
    const double want = (1 + std::cos(2 * row[0])) / 2;
    CHECK(row[1] == doctest::Approx(want).scale(1.0).epsilon(1e-9));
    CHECK(row[2] == doctest::Approx(want).scale(1.0).epsilon(1e-9));
  }
  const auto sidecar = nlohmann::json::parse(slurp(prefix.string() + ".json"));
  CHECK(sidecar.contains("contrast"));
  CHECK(sidecar["csv"].get<std::string>().find("scan11.csv") != std::string::npos);
}

TEST_CASE("reruns are byte identical") {
  const auto a = work_dir() / "rerun";
  const std::string args = "scan --input 22 --scheme 3,1 --g2 0.018 --indist 0.974 "
                           "--eta-d 0.761 --points 61 --out " + a.string();
  REQUIRE(run(args) == 0);
  const auto csv_first = slurp(a.string() + ".csv");
  const auto json_first = slurp(a.string() + ".json");
  REQUIRE(run(args) == 0);
  CHECK(slurp(a.string() + ".csv") == csv_first);
  CHECK(slurp(a.string() + ".json") == json_first);
}

TEST_CASE("config files feed defaults and the command line wins") {
  const auto cfg = work_dir() / "scan.cfg";
  {
    std::ofstream out(cfg);
    out << "# fringe scan settings\n";
    out << "input=11\n";
    out << "ideal=true\n";
    out << "points=5\n";
  }
  const auto defaults = work_dir() / "cfg_defaults";
  REQUIRE(run("scan --config " + cfg.string() + " --out " + defaults.string()) == 0);
  CHECK(csv_rows(defaults.string() + ".csv").size() == 5);
  const auto override_out = work_dir() / "cfg_override";
  REQUIRE(run("scan --config " + cfg.string() + " --points 9 --out " +
              override_out.string()) == 0);
  CHECK(csv_rows(override_out.string() + ".csv").size() == 9);
}

TEST_CASE("analytic sensitivity reaches the two photon bound") {
  const auto prefix = work_dir() / "sens11";
  REQUIRE(run("sensitivity --analytic p11 --out " + prefix.string()) == 0);
  const auto js = nlohmann::json::parse(slurp(prefix.string() + ".json"));
  CHECK(js["s_max"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("wavepacket overlap starts at unity") {
  const auto prefix = work_dir() / "overlap";
  REQUIRE(run("overlap --tau-max 120 --steps 7 --out " + prefix.string()) == 0);
  const auto rows = csv_rows(prefix.string() + ".csv");
  REQUIRE(rows.size() == 7);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][1] == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] < rows[i - 1][1]);
}

TEST_CASE("calibration round trip through files") {
  const auto data = work_dir() / "plate.csv";
  {
    std::ofstream out(data);
    out << "theta,intensity\n";
    for (int j = 0; j < 601; ++j) {
      const double t = 1.4 * j / 600.0;
      out << t << ',' << std::cos(5.0 * t * t) << '\n';
    }
  }
  const auto prefix = work_dir() / "plate_fit";
  REQUIRE(run("calibrate --data " + data.string() + " --out " + prefix.string()) == 0);
  const auto js = nlohmann::json::parse(slurp(prefix.string() + ".json"));
  CHECK(js["fit"]["coefficient"].get<double>() == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("synthesize then staged fit through files") {
  const auto d10 = work_dir() / "d10";
  const auto d20 = work_dir() / "d20";
  const auto d11 = work_dir() / "d11";
  const auto d22 = work_dir() / "d22";
  REQUIRE(run("synthesize --input 10 --scheme 1,0 --eta-c 0.8034 --eta-d 0.781 "
              "--points 61 --counts 1e5 --seed 61005 --out " + d10.string()) == 0);
  REQUIRE(run("synthesize --input 20 --scheme 1,1 --g2 0.018 --eta-c 0.8034 "
              "--eta-d 0.761 --eta-e 0.32 --eta-f 0.322 --points 61 --counts 1e5 "
              "--seed 62005 --out " + d20.string()) == 0);
  REQUIRE(run("synthesize --input 11 --scheme 1,1 --g2 0.018 --indist 0.974 "
              "--eta-c 0.8034 --eta-d 0.761 --eta-e 0.320 --eta-f 0.322 --points 61 "
              "--counts 1e5 --seed 63005 --out " + d11.string()) == 0);
  REQUIRE(run("synthesize --input 22 --scheme 3,1 --g2 0.018 --indist 0.974 "
              "--eta-c 0.803 --eta-d 0.761 --eta-e 0.178 --eta-f 0.322 --points 61 "
              "--counts 1e5 --seed 64005 --out " + d22.string()) == 0);

  const auto prefix = work_dir() / "staged";
  REQUIRE(run("fit --staged --data-10 " + d10.string() + ".csv --data-20 " +
              d20.string() + ".csv --data-11 " + d11.string() + ".csv --data-22 " +
              d22.string() + ".csv --out " + prefix.string()) == 0);
  const auto js = nlohmann::json::parse(slurp(prefix.string() + ".json"));
  const auto& combined = js["staged"]["combined"];
  CHECK(std::abs(combined["eta_d"].get<double>() - 0.761) < 0.01);
  CHECK(std::abs(combined["indistinguishability"].get<double>() - 0.974) < 0.02);
  CHECK(std::abs(combined["eta_e"].get<double>() - 0.178) < 0.02);
  REQUIRE(js["staged"]["stages"].size() == 4);
  for (const auto& [name, stage] : js["staged"]["stages"].items()) {
    CHECK(stage["converged"].get<bool>());
  }
}
