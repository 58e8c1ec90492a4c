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

#include <map>
#include <string>
#include <string_view>

#include "weaktrace/network.hpp"
#include "weaktrace/statespace.hpp"

namespace weaktrace {

/// Weak values are undefined when |<Phi|Psi>| falls below this threshold;
/// the pre/post pair then never co-occurs and NullPostselectionError is
/// raised instead of returning near-infinities.
inline constexpr double kNullPostselectionThreshold = 1e-10;

/// Relative amplitude tolerance for presence classification.
inline constexpr double kPresenceEta = 1e-6;

/// State prepared at the source cut. Must be normalized.
struct Preselection {
  PureState state;

  explicit Preselection(PureState s);
  /// Unit amplitude on the network's single source arm.
  static Preselection from_source(const StagePlan& plan);
};

/// Detector outcome at the final cut. Must be normalized.
struct Postselection {
  std::string detector;  // empty for a general outcome state
  PureState state;

  explicit Postselection(PureState s, std::string detector_name = {});
  /// Basis outcome on the arm feeding the named detector.
  static Postselection on_detector(const StagePlan& plan,
                                   std::string_view name);
};

/// Forward and backward states at one cut. The backward state is stored as
/// a ket (the post-selection pulled back by stage adjoints), so the defining
/// ratio <Phi|O|Psi>/<Phi|Psi> evaluates as
/// inner_product(backward, apply(O, forward)) / inner_product(backward,
/// forward).
struct TwoStateVector {
  std::string stage;
  PureState forward;
  PureState backward;
  Amplitude overlap;
};

/// Per-arm classification at one cut.
///
/// present:   forward and backward amplitudes both exceed eta relative to
///            the largest amplitude at the cut.
/// secondary: not present, but blocking the arm moves the weak value of
///            some present arm (anywhere in the network) by more than eta.
/// absent:    blocking the arm changes nothing.
enum class Presence { Present, Secondary, Absent };

struct PresenceVerdict {
  std::string stage;
  double eta = kPresenceEta;
  std::map<std::string, Presence> verdicts;
};

std::string_view to_string(Presence p);

PureState forward_state(const StagePlan& plan, const Preselection& pre,
                        std::string_view stage);
PureState backward_state(const StagePlan& plan, const Postselection& post,
                         std::string_view stage);

TwoStateVector two_state_vector(const StagePlan& plan, const Preselection& pre,
                                const Postselection& post,
                                std::string_view stage);

/// O_w = <Phi|O|Psi> / <Phi|Psi> at the given stage. Throws
/// NullPostselectionError when |<Phi|Psi>| <= null_threshold.
Amplitude weak_value(const StagePlan& plan, const Preselection& pre,
                     const Postselection& post, const Operator& observable,
                     std::string_view stage,
                     double null_threshold = kNullPostselectionThreshold);

/// Weak value of every single-arm projector at the cut. Values sum to 1.
std::map<std::string, Amplitude> path_weak_values(
    const StagePlan& plan, const Preselection& pre, const Postselection& post,
    std::string_view stage,
    double null_threshold = kNullPostselectionThreshold);

PresenceVerdict presence_map(const StagePlan& plan, const Preselection& pre,
                             const Postselection& post, std::string_view stage,
                             double eta = kPresenceEta);

}  // namespace weaktrace
