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

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weaktrace/statespace.hpp"

namespace weaktrace {

// Optical elements. The global beam-splitter convention is
//   out1 = t*in1 + i*r*in2,  out2 = i*r*in1 + t*in2
// (symmetric, factor i on reflection). Phase shifters multiply by e^{i phi}.
struct SourceTag {};
struct DetectorTag {};
struct MirrorTag {};
struct BlockTag {};
struct BeamSplitter {
  double t = 0.0;
  double r = 0.0;
};
struct PhaseShifter {
  double phi = 0.0;
};
struct TransversalShifter {
  double delta = 0.0;
};

using ElementParams = std::variant<SourceTag, BeamSplitter, PhaseShifter,
                                   TransversalShifter, MirrorTag, BlockTag,
                                   DetectorTag>;

struct Element {
  std::string name;
  ElementParams params;
  std::vector<std::string> in_arms;
  std::vector<std::string> out_arms;

  /// Sources and detectors terminate arms; everything else maps amplitudes
  /// between cuts and occupies one stage slot in the compiled plan.
  bool transforms() const {
    return !std::holds_alternative<SourceTag>(params) &&
           !std::holds_alternative<DetectorTag>(params);
  }
  bool is_source() const { return std::holds_alternative<SourceTag>(params); }
  bool is_detector() const {
    return std::holds_alternative<DetectorTag>(params);
  }
  bool is_block() const { return std::holds_alternative<BlockTag>(params); }
};

/// A topological cross-section of the network. `arms` is the full ordered
/// basis of the cut, including implicit vacuum arms.
struct StageCut {
  std::string name;
  std::vector<std::string> arms;
};

/// Record of a transversal shifter element: amplitude passing from its input
/// arm to `arm` acquires a transverse displacement `delta` of the particle's
/// own Gaussian mode. Plan-level stage operators treat the element as the
/// identity; instrumented runs lower these records into self-shift couplings.
struct ShiftRecord {
  std::string element;
  std::string arm;  // the shifter's output arm
  double delta = 0.0;
};

/// Validated directed acyclic interferometer description.
///
/// Validity rules: element names unique; every arm has exactly one producer
/// (a source or an element output) or is an implicit vacuum input; every arm
/// has at most one consumer; produced arms must be consumed by an element,
/// a block or a detector; beam splitters satisfy t^2 + r^2 = 1; at least one
/// source; the element graph is acyclic; every declared stage matches a cut.
class Network {
 public:
  static Network from_elements(std::vector<Element> elements,
                               std::vector<StageCut> declared_stages = {});

  const std::vector<Element>& elements() const { return elements_; }
  const Element& element(std::string_view name) const;

  /// All arms in deterministic order: produced arms in producer declaration
  /// order, then implicit vacuum arms sorted by name.
  const std::vector<std::string>& arms() const { return arms_; }
  bool has_arm(std::string_view name) const;
  /// Arms consumed somewhere but produced nowhere carry zero amplitude.
  bool is_vacuum_arm(std::string_view name) const;
  bool has_block() const { return has_block_; }

  /// (detector name, fed arm) in declaration order.
  const std::vector<std::pair<std::string, std::string>>& detectors() const {
    return detectors_;
  }
  /// (source name, produced arm) in declaration order.
  const std::vector<std::pair<std::string, std::string>>& sources() const {
    return sources_;
  }
  const std::vector<ShiftRecord>& transversal_shifts() const {
    return shifts_;
  }

  /// Cuts of the compiled plan, resolved during validation: declared names
  /// where given, auto names ("source", "<element>.out") elsewhere.
  const std::vector<StageCut>& cuts() const { return cuts_; }
  /// Transforming elements in execution order (topological, lexicographic
  /// tie-break on element names). schedule()[i] maps cuts()[i] to cuts()[i+1].
  const std::vector<std::size_t>& schedule() const { return schedule_; }

 private:
  Network() = default;
  void validate_and_plan(std::vector<StageCut> declared);

  std::vector<Element> elements_;
  std::vector<std::string> arms_;
  std::vector<std::string> vacuum_arms_;
  std::vector<std::pair<std::string, std::string>> sources_;
  std::vector<std::pair<std::string, std::string>> detectors_;
  std::vector<ShiftRecord> shifts_;
  std::vector<StageCut> cuts_;
  std::vector<std::size_t> schedule_;
  bool has_block_ = false;
};

/// Parse a NetworkSpec document (see README for the grammar) and validate it.
/// Throws ParseError with a 1-based line number, or ValidationError.
Network build_network(std::string_view spec_text);

/// Stage operator of one element on the cut that feeds it: the element's
/// block on its own arms, identity on every other arm. The result maps
/// `cut` to the successor basis derived by positional arm replacement.
Operator unitary_of(const Element& e, const Basis& cut);

/// Ordered stage operators between consecutive cuts, source to detector.
class StagePlan {
 public:
  explicit StagePlan(Network net);

  const Network& network() const { return net_; }
  const std::vector<StageCut>& cuts() const { return net_.cuts(); }
  /// ops()[i] maps cut_basis(i) to cut_basis(i+1).
  const std::vector<Operator>& ops() const { return ops_; }
  const Basis& cut_basis(std::size_t i) const { return bases_.at(i); }
  std::size_t cut_count() const { return bases_.size(); }
  std::size_t cut_index(std::string_view name) const;
  const Basis& source_basis() const { return bases_.front(); }
  const Basis& detector_basis() const { return bases_.back(); }
  /// Index of the first cut whose basis contains `arm`.
  std::size_t first_cut_of_arm(std::string_view arm) const;
  /// Arm fed into the named detector. Throws on unknown detectors.
  const std::string& detector_arm(std::string_view detector) const;

 private:
  Network net_;
  std::vector<Operator> ops_;
  std::vector<Basis> bases_;
};

inline StagePlan compile(const Network& n) { return StagePlan(n); }

/// New network with an opaque block inserted on `arm`. The arm's former
/// consumer, if any, is rewired to a fresh vacuum input, so the blocked
/// amplitude is absorbed. The original network is unchanged.
Network block_arm(const Network& n, std::string_view arm);

/// The user-declared stage cuts of a network: auto-generated cut names are
/// dropped and implicit vacuum arms stripped, leaving declarations that
/// revalidate against a structurally edited element list.
std::vector<StageCut> named_stages(const Network& n);

}  // namespace weaktrace
