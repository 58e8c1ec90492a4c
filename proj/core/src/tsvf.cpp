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

#include "weaktrace/tsvf.hpp"

#include <algorithm>
#include <cmath>

namespace weaktrace {

Preselection::Preselection(PureState s) : state(std::move(s)) {
  if (!state.is_normalized()) {
    throw ValidationError("preselection state is not normalized");
  }
}

Preselection Preselection::from_source(const StagePlan& plan) {
  const auto& sources = plan.network().sources();
  if (sources.size() != 1) {
    throw Error("network has " + std::to_string(sources.size()) +
                " sources; give an explicit preselection state");
  }
  return Preselection(
      PureState::unit(plan.source_basis(), sources.front().second));
}

Postselection::Postselection(PureState s, std::string detector_name)
    : detector(std::move(detector_name)), state(std::move(s)) {
  if (!state.is_normalized()) {
    throw ValidationError("postselection state is not normalized");
  }
}

Postselection Postselection::on_detector(const StagePlan& plan,
                                         std::string_view name) {
  return Postselection(
      PureState::unit(plan.detector_basis(), plan.detector_arm(name)),
      std::string(name));
}

std::string_view to_string(Presence p) {
  switch (p) {
    case Presence::Present:
      return "present";
    case Presence::Secondary:
      return "secondary";
    case Presence::Absent:
      return "absent";
  }
  return "?";
}

PureState forward_state(const StagePlan& plan, const Preselection& pre,
                        std::string_view stage) {
  const std::size_t target = plan.cut_index(stage);
  PureState s = pre.state.remapped(plan.source_basis());
  for (std::size_t i = 0; i < target; ++i) {
    s = apply(plan.ops()[i], s);
  }
  return s;
}

PureState backward_state(const StagePlan& plan, const Postselection& post,
                         std::string_view stage) {
  const std::size_t target = plan.cut_index(stage);
  PureState s = post.state.remapped(plan.detector_basis());
  for (std::size_t i = plan.ops().size(); i > target; --i) {
    s = apply(plan.ops()[i - 1].adjoint(), s);
  }
  return s;
}

TwoStateVector two_state_vector(const StagePlan& plan, const Preselection& pre,
                                const Postselection& post,
                                std::string_view stage) {
  PureState fwd = forward_state(plan, pre, stage);
  PureState bwd = backward_state(plan, post, stage);
  const Amplitude overlap = inner_product(bwd, fwd);
  return {std::string(stage), std::move(fwd), std::move(bwd), overlap};
}

Amplitude weak_value(const StagePlan& plan, const Preselection& pre,
                     const Postselection& post, const Operator& observable,
                     std::string_view stage, double null_threshold) {
  const TwoStateVector tsv = two_state_vector(plan, pre, post, stage);
  if (std::abs(tsv.overlap) <= null_threshold) {
    throw NullPostselectionError(std::abs(tsv.overlap));
  }
  return inner_product(tsv.backward, apply(observable, tsv.forward)) /
         tsv.overlap;
}

std::map<std::string, Amplitude> path_weak_values(
    const StagePlan& plan, const Preselection& pre, const Postselection& post,
    std::string_view stage, double null_threshold) {
  const TwoStateVector tsv = two_state_vector(plan, pre, post, stage);
  if (std::abs(tsv.overlap) <= null_threshold) {
    throw NullPostselectionError(std::abs(tsv.overlap));
  }
  std::map<std::string, Amplitude> values;
  for (std::size_t i = 0; i < tsv.forward.basis.size(); ++i) {
    values[tsv.forward.basis.label(i).name] =
        std::conj(tsv.backward.amps[i]) * tsv.forward.amps[i] / tsv.overlap;
  }
  return values;
}

namespace {

double max_abs(const PureState& s) {
  double m = 0.0;
  for (const auto& a : s.amps) m = std::max(m, std::abs(a));
  return m;
}

// (stage, arm) pairs passing the amplitude-overlap test, network-wide.
std::vector<std::pair<std::string, std::string>> present_pairs(
    const StagePlan& plan, const Preselection& pre, const Postselection& post,
    double eta) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& cut : plan.cuts()) {
    const PureState fwd = forward_state(plan, pre, cut.name);
    const PureState bwd = backward_state(plan, post, cut.name);
    const double fwd_floor = eta * max_abs(fwd);
    const double bwd_floor = eta * max_abs(bwd);
    for (std::size_t i = 0; i < fwd.dim(); ++i) {
      if (std::abs(fwd.amps[i]) > fwd_floor &&
          std::abs(bwd.amps[i]) > bwd_floor) {
        pairs.emplace_back(cut.name, fwd.basis.label(i).name);
      }
    }
  }
  return pairs;
}

Preselection remap_pre(const Preselection& pre, const StagePlan& to) {
  return Preselection(pre.state.remapped(to.source_basis()));
}

Postselection remap_post(const Postselection& post, const StagePlan& to) {
  return Postselection(post.state.remapped(to.detector_basis()),
                       post.detector);
}

}  // namespace

PresenceVerdict presence_map(const StagePlan& plan, const Preselection& pre,
                             const Postselection& post, std::string_view stage,
                             double eta) {
  const TwoStateVector tsv = two_state_vector(plan, pre, post, stage);
  if (std::abs(tsv.overlap) <= kNullPostselectionThreshold) {
    throw NullPostselectionError(std::abs(tsv.overlap));
  }

  const auto present = present_pairs(plan, pre, post, eta);
  const auto is_present = [&](const std::string& cut, const std::string& arm) {
    return std::find(present.begin(), present.end(), std::pair{cut, arm}) !=
           present.end();
  };

  // Reference weak values of every present (stage, arm) pair.
  std::map<std::pair<std::string, std::string>, Amplitude> reference;
  for (const auto& [cut, arm] : present) {
    reference[{cut, arm}] = path_weak_values(plan, pre, post, cut).at(arm);
  }

  PresenceVerdict verdict;
  verdict.stage = std::string(stage);
  verdict.eta = eta;

  const std::string stage_name(stage);
  for (const auto& label : tsv.forward.basis.labels()) {
    const std::string& arm = label.name;
    if (is_present(stage_name, arm)) {
      verdict.verdicts[arm] = Presence::Present;
      continue;
    }

    // Block the arm and see whether any present-arm weak value moves.
    const StagePlan blocked = compile(block_arm(plan.network(), arm));
    const Preselection pre_b = remap_pre(pre, blocked);
    const Postselection post_b = remap_post(post, blocked);
    const auto has_cut = [&](const std::string& cut) {
      for (const auto& c : blocked.cuts()) {
        if (c.name == cut) return true;
      }
      return false;
    };
    bool disturbs = false;
    try {
      for (const auto& [cut, parm] : present) {
        // A cut crossing the blocked arm downstream of the block no longer
        // exists; the weak values it carried are unaffected by construction.
        if (!has_cut(cut)) continue;
        const auto values = path_weak_values(blocked, pre_b, post_b, cut);
        if (std::abs(values.at(parm) - reference.at({cut, parm})) > eta) {
          disturbs = true;
          break;
        }
      }
    } catch (const NullPostselectionError&) {
      // Blocking destroyed the post-selection entirely; maximal disturbance.
      disturbs = true;
    }
    verdict.verdicts[arm] = disturbs ? Presence::Secondary : Presence::Absent;
  }
  return verdict;
}

}  // namespace weaktrace
