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

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weaktrace/report.hpp"
#include "weaktrace/tsvf.hpp"
#include "weaktrace/weakmeas.hpp"

namespace weaktrace {

/// Expected log-log order of one probe's trace, checked over a strength
/// grid by rebuilding the scenario via `family`.
struct OrderCheck {
  std::string name;        // annotation name in the report
  std::string pointer_id;  // whose trace magnitude is read
  std::string arm;
  double expected = 1.0;  // +infinity expects an exactly zero trace
  double tolerance = 0.05;
  bool negligible = false;  // mark the trace negligible (second order)
  std::function<InstrumentedNetwork(double)> family;
};

/// A runnable setup: instrumented network, pre/post-selection, and the
/// structural expectations the report grades itself against.
struct Scenario {
  std::string name;
  InstrumentedNetwork net;
  Preselection pre;
  Postselection post;
  std::vector<std::pair<std::string, double>> parameters;
  std::string note;
  std::vector<OrderCheck> order_checks;
  /// Scenario-specific annotations, appended after the generic ones.
  std::function<void(const Scenario&, ScenarioReport&)> annotate;
};

/// The tuned nested interferometer. An outer splitter of transmissivity
/// t_outer sends one part along arm A and the rest through an inner 50/50
/// interferometer (arms C and E) tuned so that its output F toward the
/// final splitter is dark; F and A recombine into detectors D and Dp, the
/// second inner output G is dumped. Pre-selects the source, post-selects D.
Scenario fig1_nested(double t_outer);

/// fig1 with a qubit probe of strength eps_inner on inner arm C, and
/// optionally a second qubit probe on the leakage arm F.
Scenario sec3_probe(double eps_inner,
                    std::optional<double> probe_f = std::nullopt);

/// fig1 with qubit probes on C and on F. The second probe sits on an arm
/// reached only through leakage induced by the first, so the joint
/// double-flip signal scales as the product of the two strengths.
Scenario sec4_double(double eps1, double eps2);

/// fig1 with a phase shifter of angle delta on C; with restore, a matching
/// shifter on E brings the detector intensities back to baseline.
Scenario sec5_phase(double delta, bool restore);

/// fig1 with a transversal self-shift (delta, sigma) on C; with restore, a
/// matching shifter on E cancels the leakage exactly while the pointer
/// reading at D returns to zero.
Scenario sec5_transversal(double delta, double sigma, bool restore);

/// Execute every computation for the scenario and grade its annotations.
/// Deterministic: identical scenarios produce byte-identical reports.
ScenarioReport run(const Scenario& s);

/// The canonical network description text for fig1_nested(t_outer).
std::string fig1_network_text(double t_outer);

}  // namespace weaktrace
