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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weaktrace/statespace.hpp"

namespace weaktrace {

/// Version tag of the report document format.
inline constexpr const char* kReportSchemaId = "tsvf-report/1";
/// Identifier of the fixed global phase convention (factor i on reflection,
/// symmetric beam splitters).
inline constexpr const char* kConventionId = "symmetric-i-reflection/1";

/// Full result of one scenario run. Field order here fixes section order in
/// every serialization; numbers are emitted with 17 significant digits.
struct ScenarioReport {
  struct ArmAmplitudes {
    std::string arm;
    Amplitude forward;
    Amplitude backward;
  };
  struct StageSection {
    std::string stage;
    std::vector<ArmAmplitudes> arms;
  };
  struct WeakValueSection {
    std::string stage;
    std::vector<std::pair<std::string, Amplitude>> values;
  };
  struct MagnitudeSection {
    std::string stage;
    std::vector<std::pair<std::string, double>> values;
  };
  struct PresenceSection {
    std::string stage;
    std::vector<std::pair<std::string, std::string>> verdicts;
  };
  struct ProbeSection {
    std::string id;
    std::string arm;
    std::string kind;  // "qubit", "gaussian", "self-shift"
    double strength = 0.0;
    double trace_magnitude = 0.0;
    std::optional<double> order;  // +infinity marks an exactly zero trace
    double residual = 0.0;
  };
  struct Annotation {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    std::string detail;
  };

  std::string scenario;
  std::string convention = kConventionId;
  std::string status = "ok";  // "ok" or "null post-selection"
  std::vector<std::pair<std::string, double>> parameters;
  std::string note;

  std::string postselect_detector;
  double postselect_probability = 0.0;

  std::vector<StageSection> stages;  // forward/backward path amplitudes
  std::vector<WeakValueSection> weak_values;
  std::vector<MagnitudeSection> unread_magnitudes;  // probe runs only
  std::vector<PresenceSection> presence;
  std::vector<ProbeSection> probes;
  std::vector<std::pair<std::string, double>> detectors;
  std::vector<Annotation> annotations;

  bool all_annotations_pass() const;
};

/// Serialize as a tsvf-report/1 JSON document. Byte-deterministic: fixed
/// field order, %.17g numbers, no locale dependence.
std::string to_json(const ScenarioReport& report);

/// Same numeric content as the JSON document, as an aligned text table.
std::string to_text_table(const ScenarioReport& report);

/// Flat CSV view: header "section,path,value", one row per leaf value.
std::string to_csv(const ScenarioReport& report);

/// Stage-by-arm summary (forward, backward, weak value, presence) used by
/// the `table` CLI subcommand.
std::string to_stage_table(const ScenarioReport& report);

/// %.17g rendering used across all report formats.
std::string format_number(double value);

}  // namespace weaktrace
