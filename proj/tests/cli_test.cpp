// Copyright 2026 The weaktrace authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "weaktrace/report.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / "weaktrace_cli_test";
  fs::create_directories(dir);
  const fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = dir / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(WEAKTRACE_CLI_PATH) + " " + args +
                          " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path write_spec(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "weaktrace_cli_test";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

const char* kUserNet =
    "source S -> s0\n"
    "bs B1 t=0.6 r=0.8 in=s0,v1 out=a,b\n"
    "bs B2 t=0.6 r=0.8 in=a,b out=o1,o2\n"
    "det D1 in=o1\n"
    "det D2 in=o2\n"
    "stage mid arms=a,b\n";

const char* kDarkNet =
    "source S -> s0\n"
    "bs B1 t=0.70710678118654752 r=0.70710678118654752 in=s0,v1 out=a,b\n"
    "bs B2 t=0.70710678118654752 r=0.70710678118654752 in=a,b out=o1,o2\n"
    "det N in=o1\n"
    "det Y in=o2\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run fig1 emits a schema-tagged json report and exits 0") {
  const CliResult r =
      run_cli("run --scenario fig1 --t 0.70710678 --format json");
  CHECK(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["schema"] == "tsvf-report/1");
  CHECK(doc["meta"]["scenario"] == "fig1");
  CHECK(doc["meta"]["status"] == "ok");
  for (const char* key : {"postselection", "stages", "weak_values",
                          "presence", "probes", "detectors", "annotations"}) {
    CHECK(doc.contains(key));
  }
}

TEST_CASE("identical invocations produce byte-identical output") {
  const std::string args = "run --scenario sec3 --eps 0.01 --format json";
  const CliResult a = run_cli(args);
  const CliResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("json and text-table carry identical numeric content") {
  const std::string base = "run --scenario fig1 --format ";
  const json doc = json::parse(run_cli(base + "json").out);
  const CliResult csv = run_cli(base + "csv");
  REQUIRE(csv.exit_code == 0);
  const CliResult table = run_cli(base + "text-table");
  REQUIRE(table.exit_code == 0);

  std::istringstream rows(csv.out);
  std::string line;
  std::getline(rows, line);
  CHECK(line == "section,path,value");
  int checked = 0;
  while (std::getline(rows, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const std::string section = line.substr(0, c1);
    const std::string path = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string value = line.substr(c2 + 1);
    if (section != "stages" && section != "weak_values" &&
        section != "detectors") {
      continue;
    }
    json node = doc[section];
    std::istringstream parts(path);
    std::string part;
    while (std::getline(parts, part, '.')) node = node[part];
    REQUIRE(node.is_number());
    CHECK(weaktrace::format_number(node.get<double>()) == value);
    // the text table renders the same number
    CHECK(table.out.find(value) != std::string::npos);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("run on a user network picks the requested selection") {
  const fs::path spec = write_spec("user.net", kUserNet);
  const CliResult r =
      run_cli("run --spec " + spec.string() + " --post D2 --format json");
  CHECK(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["postselection"]["detector"] == "D2");
  CHECK(doc["weak_values"].contains("mid"));
  // two detectors and no --post is ambiguous
  const CliResult ambiguous = run_cli("run --spec " + spec.string());
  CHECK(ambiguous.exit_code == 2);
}

TEST_CASE("a null post-selection exits with the engine code") {
  const fs::path spec = write_spec("dark.net", kDarkNet);
  const CliResult r =
      run_cli("run --spec " + spec.string() + " --post N --format json");
  CHECK(r.exit_code == 3);
  const json doc = json::parse(r.out);
  CHECK(doc["meta"]["status"] == "null post-selection");
}

TEST_CASE("a failed structural annotation exits 1") {
  // at t -> 1 the inner weak values fall below the structural floor
  const CliResult r = run_cli("run --scenario fig1 --t 0.9999 --format json");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("annotation failed") != std::string::npos);
}

TEST_CASE("validate accepts a good description and names bad elements") {
  const fs::path good = write_spec("good.net", kUserNet);
  const CliResult ok = run_cli("validate --spec " + good.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("ok:") != std::string::npos);

  const fs::path bad = write_spec(
      "bad.net",
      "source S -> a0\nbs BS1 t=0.8 r=0.8 in=a0,v1 out=x,y\ndet D in=x\n"
      "det E in=y\n");
  const CliResult fail = run_cli("validate --spec " + bad.string());
  CHECK(fail.exit_code == 2);
  CHECK(fail.err.find("BS1") != std::string::npos);
  CHECK(fail.err.find("not unitary") != std::string::npos);
}

TEST_CASE("sweep produces the expected column layout and orders") {
  const CliResult r =
      run_cli("sweep --scenario sec3 --param eps --grid 1e-2,1e-3,1e-4");
  REQUIRE(r.exit_code == 0);
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  CHECK(line == "eps,arm,trace_magnitude,order");
  double f_order = 0.0;
  int count = 0;
  std::string previous_key;
  while (std::getline(rows, line)) {
    ++count;
    std::istringstream fields(line);
    std::string eps, arm, mag, order;
    std::getline(fields, eps, ',');
    std::getline(fields, arm, ',');
    std::getline(fields, mag, ',');
    std::getline(fields, order, ',');
    const std::string key = eps + "/" + arm;
    CHECK(previous_key < key);  // sorted by (eps, arm)
    previous_key = key;
    if (arm == "F") f_order = std::stod(order);
  }
  CHECK(count == 6);
  CHECK(std::abs(f_order - 2.0) <= 0.05);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("run --scenario nope").exit_code == 2);
  CHECK(run_cli("run").exit_code == 2);
  CHECK(run_cli("sweep --scenario sec3 --param eps --grid 1e-2,1e-3")
            .exit_code == 2);
  CHECK(run_cli("sweep --scenario sec3 --param eps --grid 1e-4,1e-3,1e-2")
            .exit_code == 2);
  CHECK(run_cli("sweep --scenario fig1 --param eps").exit_code == 2);
  CHECK(run_cli("run --scenario fig1 --t 2.0").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("table prints the stage summary") {
  const CliResult r = run_cli("table --scenario fig1");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("stage  arm") != std::string::npos);
  CHECK(r.out.find("L3") != std::string::npos);
  CHECK(r.out.find("secondary") != std::string::npos);
}

TEST_CASE("reports can be written to a file") {
  const fs::path out =
      fs::temp_directory_path() / "weaktrace_cli_test" / "report.json";
  const CliResult r =
      run_cli("run --scenario fig1 --format json --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.empty());
  const json doc = json::parse(slurp(out));
  CHECK(doc["schema"] == "tsvf-report/1");
}

}  // TEST_SUITE
