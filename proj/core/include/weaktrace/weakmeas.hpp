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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weaktrace/network.hpp"
#include "weaktrace/statespace.hpp"
#include "weaktrace/tsvf.hpp"

namespace weaktrace {

/// Post-selected joint probabilities below this are treated as null.
inline constexpr double kJointNullProbability = 1e-20;
/// Trace magnitudes below this floor count as exact zeros (order infinity).
inline constexpr double kZeroTraceFloor = 1e-14;
/// Largest acceptable RMS residual of the log-log order fit.
inline constexpr double kOrderResidualBound = 0.02;
/// Default strength grid for order estimation.
inline constexpr double kDefaultOrderGrid[] = {1e-2, 1e-3, 1e-4};

/// Qubit probe: passage rotates the pointer |0> -> cos(eps)|0> + sin(eps)|1>.
struct QubitPointer {
  double epsilon = 0.0;
};
/// External Gaussian register of width sigma, displaced by delta on passage.
struct GaussianPointer {
  double delta = 0.0;
  double sigma = 1.0;
};
/// Transverse Gaussian mode of the particle itself (shared across arms),
/// translated by delta on passage through the coupled arm.
struct SelfShiftPointer {
  double delta = 0.0;
  double sigma = 1.0;
};

struct Pointer {
  std::string id;
  std::variant<QubitPointer, GaussianPointer, SelfShiftPointer> kind;
};

struct ProbeCoupling {
  std::string arm;
  Pointer pointer;
};

/// Slot bookkeeping for the joint engine. Level values are small signed
/// integers: qubit levels 0/1; displacement registers hold the coefficient
/// n of a center n*delta, with n in {-1, 0, +1} (backward evolution pulls
/// centers negative). All self-shift slots describe one shared mode whose
/// center is the sum of slot displacements.
struct ProbeRegistry {
  enum class SlotKind { Qubit, Gaussian, SelfShift };
  struct Slot {
    SlotKind kind;
    std::string id;
    std::string arm;
    double epsilon = 0.0;  // qubit strength
    double delta = 0.0;    // displacement per passage
    double sigma = 0.0;    // Gaussian width
  };

  std::vector<Slot> slots;
  double self_sigma = 0.0;  // shared width of the self-shift mode, if any

  std::size_t slot_index(std::string_view pointer_id) const;
  bool has_self_shift() const;
  /// Total center of the shared transverse mode for one level tuple.
  double self_center(std::span<const std::int8_t> levels) const;
  /// Inner product between joint register basis states (real by symmetry).
  double gram(std::span<const std::int8_t> a,
              std::span<const std::int8_t> b) const;
};

/// A network plus the probes attached to its arms. Transversal-shift
/// elements present in the network are lowered into self-shift couplings
/// (sharing `self_shift_sigma` as the beam width) at construction.
class InstrumentedNetwork {
 public:
  explicit InstrumentedNetwork(Network net, double self_shift_sigma = 1.0);

  const Network& network() const { return net_; }
  const std::vector<ProbeCoupling>& couplings() const { return couplings_; }
  bool has_probes() const { return !couplings_.empty(); }

  friend InstrumentedNetwork attach_probe(const InstrumentedNetwork& base,
                                          const ProbeCoupling& c);

 private:
  Network net_;
  std::vector<ProbeCoupling> couplings_;
};

InstrumentedNetwork attach_probe(const InstrumentedNetwork& base,
                                 const ProbeCoupling& c);
InstrumentedNetwork attach_probe(const Network& n, const ProbeCoupling& c);

/// Exact amplitude vector over (arm x pointer registers) at one cut.
struct JointState {
  using Levels = std::vector<std::int8_t>;
  using Key = std::pair<std::uint32_t, Levels>;  // (arm index, slot levels)

  std::shared_ptr<const ProbeRegistry> registry;
  Basis arms;
  std::string stage;
  std::map<Key, Amplitude> comps;

  /// Total squared norm under the register Gram metric.
  double norm_squared() const;
  /// Squared norm of the components on one arm.
  double arm_probability(std::string_view arm) const;
};

/// Post-selected pointer registers, normalized, with the selection
/// probability attached.
struct PointerState {
  std::shared_ptr<const ProbeRegistry> registry;
  std::map<JointState::Levels, Amplitude> comps;
};

struct PostselectResult {
  PointerState pointer_state;
  double probability = 0.0;
};

/// Exact joint state at the detector cut.
JointState evolve_joint(const InstrumentedNetwork& in, const Preselection& pre);
/// Exact joint state at a named cut.
JointState evolve_joint_at(const InstrumentedNetwork& in,
                           const Preselection& pre, std::string_view stage);

/// Project the path register onto the post-selection outcome. Throws
/// NullPostselectionError when the probability is below
/// kJointNullProbability.
PostselectResult postselect(const JointState& js, const Postselection& post);

/// Distinguishability of one pointer from its initial state:
/// sqrt(1 - <init|rho|init>). For a single probe this is
/// sqrt(1 - |<init|final>|^2). Self-shift ids read the shared mode.
double trace_magnitude(const PointerState& ps, std::string_view pointer_id);

/// Expectation of the pointer coordinate. Gaussian-family pointers only.
double pointer_mean(const PointerState& ps, std::string_view pointer_id);

/// Probability that amplitude leaves through `arm`, evaluated at the last
/// cut containing it (after every probe on the arm has acted).
double arm_exit_probability(const InstrumentedNetwork& in,
                            const Preselection& pre, std::string_view arm);

/// Magnitude of the post-selected (unnormalized) amplitude on |1>|1> of the
/// two qubit probes. Requires exactly two qubit probes.
double joint_flip_signal(const InstrumentedNetwork& in, const Preselection& pre,
                         const Postselection& post);

/// <Phi|Psi> of the instrumented network at a cut, with every pointer
/// register post-selected on its initial state. Stage-independent.
Amplitude joint_overlap(const InstrumentedNetwork& in, const Preselection& pre,
                        const Postselection& post, std::string_view stage);

/// Weak values on the instrumented network: probe unitaries join the plan
/// and every pointer register is post-selected on its initial state. These
/// reduce to the plain weak values when no probes are attached and they sum
/// to one over the arms of any cut.
std::map<std::string, Amplitude> instrumented_weak_values(
    const InstrumentedNetwork& in, const Preselection& pre,
    const Postselection& post, std::string_view stage,
    double null_threshold = kNullPostselectionThreshold);

/// Magnitude of the per-arm transition amplitude with the pointers left
/// unread: ||<post| U_after P_arm |joint at stage>|| / ||<post| U |joint>||,
/// norms taken over the pointer registers. This is the size of the
/// forward/backward overlap an additional infinitesimal probe on the arm
/// would couple to; first order in the strength of upstream probes.
std::map<std::string, double> unread_weak_value_magnitudes(
    const InstrumentedNetwork& in, const Preselection& pre,
    const Postselection& post, std::string_view stage,
    double null_threshold = kNullPostselectionThreshold);

/// Detector intensities of the instrumented network (no post-selection).
std::map<std::string, double> detector_intensities(
    const InstrumentedNetwork& in, const Preselection& pre);

struct TraceEstimate {
  std::string arm;
  double magnitude = 0.0;  // trace magnitude at the largest grid strength
  /// Fitted log-log slope. Set only when the fit residual is within
  /// kOrderResidualBound; +infinity marks an exactly vanishing trace.
  std::optional<double> order;
  double fit_residual = 0.0;
  std::vector<std::pair<double, double>> samples;  // (strength, magnitude)
};

/// Least-squares slope of log(magnitude) versus log(strength) over the
/// grid. `trace_at` rebuilds the scenario at the given strength and returns
/// the trace magnitude for the probed arm.
TraceEstimate estimate_order(const std::function<double(double)>& trace_at,
                             std::string arm,
                             std::span<const double> grid = kDefaultOrderGrid,
                             double residual_bound = kOrderResidualBound,
                             double zero_floor = kZeroTraceFloor);

}  // namespace weaktrace
