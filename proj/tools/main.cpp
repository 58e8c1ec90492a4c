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

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "weaktrace/scenarios.hpp"

namespace {

using namespace weaktrace;

constexpr int kExitOk = 0;
constexpr int kExitAnnotationFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEngine = 3;

struct Params {
  double t = 0.70710678118654752;
  double eps = 1e-2;
  double eps_f = -1.0;  // unset: follows eps; 0 removes the F probe
  double eps2 = 1e-2;
  double delta = 1e-2;
  double sigma = 1.0;
  bool restore = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + out_path + "'");
  out << text;
}

Scenario scenario_by_name(const std::string& name, const Params& p) {
  if (name == "fig1") return fig1_nested(p.t);
  if (name == "sec3") {
    const double f = p.eps_f < 0.0 ? p.eps : p.eps_f;
    return sec3_probe(p.eps, f == 0.0 ? std::nullopt
                                      : std::optional<double>(f));
  }
  if (name == "sec4") return sec4_double(p.eps, p.eps2);
  if (name == "sec5-phase") return sec5_phase(p.delta, p.restore);
  if (name == "sec5-shift")
    return sec5_transversal(p.delta, p.sigma, p.restore);
  throw std::invalid_argument(
      "unknown scenario '" + name +
      "' (expected fig1, sec3, sec4, sec5-phase or sec5-shift)");
}

Scenario scenario_from_spec(const std::string& path, const std::string& pre,
                            const std::string& post, double sigma) {
  const Network net = build_network(read_file(path));
  const StagePlan plan = compile(net);

  Preselection presel = pre.empty()
                            ? Preselection::from_source(plan)
                            : Preselection(PureState::unit(
                                  plan.source_basis(), pre));
  std::string detector = post;
  if (detector.empty()) {
    if (net.detectors().size() != 1) {
      throw std::invalid_argument(
          "network has " + std::to_string(net.detectors().size()) +
          " detectors; choose one with --post");
    }
    detector = net.detectors().front().first;
  }
  Postselection postsel = Postselection::on_detector(plan, detector);

  return Scenario{"custom",
                  InstrumentedNetwork(net, sigma),
                  std::move(presel),
                  std::move(postsel),
                  {},
                  "",
                  {},
                  nullptr};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double value = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      grid.push_back(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid grid value '" + item + "'");
    }
  }
  if (grid.size() < 3) {
    throw std::invalid_argument("grid needs at least 3 values");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) {
      throw std::invalid_argument("grid values must be positive");
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw std::invalid_argument("grid values must be strictly decreasing");
    }
  }
  return grid;
}

int do_run(const std::string& scenario_name, const std::string& spec_path,
           const Params& p, const std::string& pre, const std::string& post,
           const std::string& format, const std::string& out_path) {
  const Scenario scenario =
      spec_path.empty() ? scenario_by_name(scenario_name, p)
                        : scenario_from_spec(spec_path, pre, post, p.sigma);
  const ScenarioReport report = run(scenario);

  std::string text;
  if (format == "json") {
    text = to_json(report);
  } else if (format == "csv") {
    text = to_csv(report);
  } else if (format == "text-table") {
    text = to_text_table(report);
  } else {
    throw std::invalid_argument("unknown format '" + format + "'");
  }
  write_output(text, out_path);

  if (report.status != "ok") {
    std::cerr << "engine: " << report.status << "\n";
    return kExitEngine;
  }
  if (!report.all_annotations_pass()) {
    for (const auto& a : report.annotations) {
      if (!a.pass) {
        std::cerr << "annotation failed: " << a.name << " (measured "
                  << format_number(a.measured) << ")\n";
      }
    }
    return kExitAnnotationFailed;
  }
  return kExitOk;
}

int do_sweep(const std::string& scenario_name, const std::string& param,
             const std::vector<double>& grid, const std::string& out_path) {
  if (param != "eps") {
    throw std::invalid_argument("unsupported sweep parameter '" + param +
                                "' (only 'eps')");
  }
  if (scenario_name != "sec3" && scenario_name != "sec4") {
    throw std::invalid_argument("sweep supports the sec3 and sec4 scenarios");
  }

  const Network net =
      build_network(fig1_network_text(0.70710678118654752));
  const StagePlan plan = compile(net);
  const Preselection pre = Preselection::from_source(plan);
  const Postselection post = Postselection::on_detector(plan, "D");
  const auto family = [&](double eps) {
    InstrumentedNetwork in(net);
    in = attach_probe(in, {"C", {"pC", QubitPointer{eps}}});
    in = attach_probe(in, {"F", {"pF", QubitPointer{eps}}});
    return in;
  };

  struct Row {
    double eps;
    std::string arm;
    double magnitude;
    double order;
  };
  std::vector<Row> rows;
  std::map<std::string, double> orders;
  for (const auto& [id, arm] :
       std::vector<std::pair<std::string, std::string>>{{"pC", "C"},
                                                        {"pF", "F"}}) {
    const auto est = estimate_order(
        [&](double eps) {
          const auto result = postselect(evolve_joint(family(eps), pre), post);
          return trace_magnitude(result.pointer_state, id);
        },
        arm, grid);
    orders[arm] = est.order.value_or(std::numeric_limits<double>::quiet_NaN());
    for (const auto& [eps, mag] : est.samples) {
      rows.push_back({eps, arm, mag, orders[arm]});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.eps != b.eps ? a.eps < b.eps : a.arm < b.arm;
  });

  std::ostringstream csv;
  csv << "eps,arm,trace_magnitude,order\n";
  for (const auto& row : rows) {
    csv << format_number(row.eps) << ',' << row.arm << ','
        << format_number(row.magnitude) << ',' << format_number(row.order)
        << "\n";
  }
  write_output(csv.str(), out_path);
  return kExitOk;
}

int do_table(const std::string& scenario_name, const Params& p,
             const std::string& out_path) {
  const ScenarioReport report = run(scenario_by_name(scenario_name, p));
  write_output(to_stage_table(report), out_path);
  return report.status == "ok" ? kExitOk : kExitEngine;
}

int do_validate(const std::string& spec_path) {
  const Network net = build_network(read_file(spec_path));
  std::cout << "ok: " << net.elements().size() << " elements, "
            << net.arms().size() << " arms, " << net.cuts().size()
            << " cuts\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "weaktrace: exact interferometer simulator for pre- and post-selected "
      "path amplitudes, weak values and weak-measurement pointer readouts"};
  app.require_subcommand(1);

  Params p;
  std::string scenario_name;
  std::string spec_path;
  std::string pre_arm;
  std::string post_detector;
  std::string format = "json";
  std::string out_path;
  std::string param = "eps";
  std::string grid_text = "1e-2,1e-3,1e-4";

  CLI::App* cmd_run = app.add_subcommand(
      "run", "run a scenario or a network description and emit a report");
  cmd_run->add_option("--scenario", scenario_name,
                      "fig1|sec3|sec4|sec5-phase|sec5-shift");
  cmd_run->add_option("--spec", spec_path, "network description file");
  cmd_run->add_option("--pre", pre_arm, "source arm to pre-select (--spec)");
  cmd_run->add_option("--post", post_detector,
                      "detector to post-select (--spec)");
  cmd_run->add_option("--t", p.t, "outer splitter transmissivity (fig1)");
  cmd_run->add_option("--eps", p.eps, "probe strength (sec3, sec4)");
  cmd_run->add_option("--eps-f", p.eps_f,
                      "strength of the F probe (sec3; 0 removes it)");
  cmd_run->add_option("--eps2", p.eps2, "second probe strength (sec4)");
  cmd_run->add_option("--delta", p.delta, "shift (sec5-phase, sec5-shift)");
  cmd_run->add_option("--sigma", p.sigma,
                      "beam width (sec5-shift, --spec shifters)");
  cmd_run->add_flag("--restore", p.restore,
                    "add the matching shifter on E (sec5 scenarios)");
  cmd_run->add_option("--format", format, "json|csv|text-table");
  cmd_run->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "sweep a probe strength and emit trace magnitudes as CSV");
  cmd_sweep->add_option("--scenario", scenario_name, "sec3|sec4")
      ->required();
  cmd_sweep->add_option("--param", param, "swept parameter (eps)");
  cmd_sweep->add_option("--grid", grid_text,
                        "comma-separated strictly decreasing strengths");
  cmd_sweep->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* cmd_table = app.add_subcommand(
      "table", "print the stage-by-arm summary of a scenario");
  cmd_table->add_option("--scenario", scenario_name,
                        "fig1|sec3|sec4|sec5-phase|sec5-shift")
      ->required();
  cmd_table->add_option("--t", p.t, "outer splitter transmissivity (fig1)");
  cmd_table->add_option("--eps", p.eps, "probe strength (sec3, sec4)");
  cmd_table->add_option("--delta", p.delta, "shift (sec5 scenarios)");
  cmd_table->add_option("--sigma", p.sigma, "beam width (sec5-shift)");
  cmd_table->add_flag("--restore", p.restore, "matching shifter on E");
  cmd_table->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* cmd_validate =
      app.add_subcommand("validate", "check a network description file");
  cmd_validate->add_option("--spec", spec_path, "network description file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_run->parsed()) {
      if (scenario_name.empty() == spec_path.empty()) {
        std::cerr << "run needs exactly one of --scenario or --spec\n";
        return kExitUsage;
      }
      return do_run(scenario_name, spec_path, p, pre_arm, post_detector,
                    format, out_path);
    }
    if (cmd_sweep->parsed()) {
      return do_sweep(scenario_name, param, parse_grid(grid_text), out_path);
    }
    if (cmd_table->parsed()) {
      return do_table(scenario_name, p, out_path);
    }
    if (cmd_validate->parsed()) {
      return do_validate(spec_path);
    }
  } catch (const ParseError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NullPostselectionError& e) {
    std::cerr << "engine: " << e.what() << "\n";
    return kExitEngine;
  } catch (const Error& e) {
    std::cerr << "engine: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitUsage;
}
