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

#include "weaktrace/weakmeas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace weaktrace {

namespace {

constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

bool is_zero(const Amplitude& a) {
  return a.real() == 0.0 && a.imag() == 0.0;
}

void accumulate(std::map<JointState::Key, Amplitude>& comps,
                JointState::Key key, const Amplitude& value) {
  auto [it, inserted] = comps.emplace(std::move(key), value);
  if (!inserted) {
    it->second += value;
    if (is_zero(it->second)) comps.erase(it);
  } else if (is_zero(it->second)) {
    comps.erase(it);
  }
}

}  // namespace

std::size_t ProbeRegistry::slot_index(std::string_view pointer_id) const {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].id == pointer_id) return i;
  }
  throw Error("unknown pointer '" + std::string(pointer_id) + "'");
}

bool ProbeRegistry::has_self_shift() const {
  return std::any_of(slots.begin(), slots.end(), [](const Slot& s) {
    return s.kind == SlotKind::SelfShift;
  });
}

double ProbeRegistry::self_center(std::span<const std::int8_t> levels) const {
  double center = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].kind == SlotKind::SelfShift) {
      center += static_cast<double>(levels[i]) * slots[i].delta;
    }
  }
  return center;
}

double ProbeRegistry::gram(std::span<const std::int8_t> a,
                           std::span<const std::int8_t> b) const {
  double g = 1.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    switch (slots[i].kind) {
      case SlotKind::Qubit:
        if (a[i] != b[i]) return 0.0;
        break;
      case SlotKind::Gaussian:
        if (a[i] != b[i]) {
          g *= gaussian_overlap(a[i] * slots[i].delta, b[i] * slots[i].delta,
                                slots[i].sigma);
        }
        break;
      case SlotKind::SelfShift:
        break;  // shared mode, handled once below
    }
  }
  if (has_self_shift()) {
    const double ca = self_center(a);
    const double cb = self_center(b);
    if (ca != cb) g *= gaussian_overlap(ca, cb, self_sigma);
  }
  return g;
}

InstrumentedNetwork::InstrumentedNetwork(Network net, double self_shift_sigma)
    : net_(std::move(net)) {
  for (const auto& shift : net_.transversal_shifts()) {
    if (!(self_shift_sigma > 0.0)) {
      throw Error("transversal shifters need a positive beam width sigma");
    }
    couplings_.push_back(
        {shift.arm,
         {shift.element, SelfShiftPointer{shift.delta, self_shift_sigma}}});
  }
}

InstrumentedNetwork attach_probe(const InstrumentedNetwork& base,
                                 const ProbeCoupling& c) {
  if (!base.net_.has_arm(c.arm)) {
    throw Error("unknown arm '" + c.arm + "'");
  }
  for (const auto& existing : base.couplings_) {
    if (existing.pointer.id == c.pointer.id) {
      throw Error("duplicate pointer id '" + c.pointer.id + "'");
    }
  }
  if (const auto* q = std::get_if<QubitPointer>(&c.pointer.kind)) {
    if (!(q->epsilon >= 0.0 && q->epsilon < 1.5707963267948966)) {
      throw Error("qubit probe strength must lie in [0, pi/2)");
    }
  } else if (const auto* g = std::get_if<GaussianPointer>(&c.pointer.kind)) {
    if (!(g->sigma > 0.0)) throw Error("pointer width sigma must be positive");
  } else if (const auto* s = std::get_if<SelfShiftPointer>(&c.pointer.kind)) {
    if (!(s->sigma > 0.0)) throw Error("pointer width sigma must be positive");
    for (const auto& existing : base.couplings_) {
      if (const auto* other =
              std::get_if<SelfShiftPointer>(&existing.pointer.kind)) {
        if (other->sigma != s->sigma) {
          throw Error("self-shift probes must share one sigma");
        }
      }
    }
  }
  InstrumentedNetwork out = base;
  out.couplings_.push_back(c);
  return out;
}

InstrumentedNetwork attach_probe(const Network& n, const ProbeCoupling& c) {
  return attach_probe(InstrumentedNetwork(n), c);
}

namespace {

/// Plan plus probe schedule. Couplings fire right after the cut where their
/// arm first appears, so the state reported at a cut includes every probe
/// at or before it.
class JointEngine {
 public:
  explicit JointEngine(const InstrumentedNetwork& in)
      : plan_(compile(in.network())) {
    auto reg = std::make_shared<ProbeRegistry>();
    fire_at_.resize(plan_.cut_count());
    for (const auto& coupling : in.couplings()) {
      ProbeRegistry::Slot slot;
      slot.id = coupling.pointer.id;
      slot.arm = coupling.arm;
      if (const auto* q = std::get_if<QubitPointer>(&coupling.pointer.kind)) {
        slot.kind = ProbeRegistry::SlotKind::Qubit;
        slot.epsilon = q->epsilon;
      } else if (const auto* g =
                     std::get_if<GaussianPointer>(&coupling.pointer.kind)) {
        slot.kind = ProbeRegistry::SlotKind::Gaussian;
        slot.delta = g->delta;
        slot.sigma = g->sigma;
      } else {
        const auto& s = std::get<SelfShiftPointer>(coupling.pointer.kind);
        slot.kind = ProbeRegistry::SlotKind::SelfShift;
        slot.delta = s.delta;
        slot.sigma = s.sigma;
        reg->self_sigma = s.sigma;
      }
      fire_at_[plan_.first_cut_of_arm(coupling.arm)].push_back(
          reg->slots.size());
      reg->slots.push_back(std::move(slot));
    }
    reg_ = std::move(reg);
  }

  const StagePlan& plan() const { return plan_; }
  const std::shared_ptr<const ProbeRegistry>& registry() const { return reg_; }

  JointState make_state(const PureState& arm_state, std::size_t cut) const {
    JointState js;
    js.registry = reg_;
    js.arms = plan_.cut_basis(cut);
    js.stage = plan_.cuts()[cut].name;
    const PureState mapped = arm_state.remapped(js.arms);
    const JointState::Levels zero(reg_->slots.size(), 0);
    for (std::size_t i = 0; i < mapped.dim(); ++i) {
      if (!is_zero(mapped.amps[i])) {
        js.comps.emplace(
            JointState::Key{static_cast<std::uint32_t>(i), zero},
            mapped.amps[i]);
      }
    }
    return js;
  }

  void apply_coupling(JointState& js, std::size_t slot_idx, bool adjoint) const {
    const auto& slot = reg_->slots[slot_idx];
    const auto arm = js.arms.find(slot.arm);
    if (!arm) throw Error("internal: probe arm missing from cut");
    const auto arm_idx = static_cast<std::uint32_t>(*arm);

    std::map<JointState::Key, Amplitude> next;
    if (slot.kind == ProbeRegistry::SlotKind::Qubit) {
      const double c = std::cos(slot.epsilon);
      const double s = adjoint ? -std::sin(slot.epsilon)
                               : std::sin(slot.epsilon);
      for (const auto& [key, amp] : js.comps) {
        if (key.first != arm_idx) {
          accumulate(next, key, amp);
          continue;
        }
        JointState::Key flipped = key;
        flipped.second[slot_idx] ^= 1;
        if (key.second[slot_idx] == 0) {
          accumulate(next, key, amp * c);
          accumulate(next, flipped, amp * s);
        } else {
          accumulate(next, key, amp * c);
          accumulate(next, flipped, -amp * s);
        }
      }
    } else {
      const std::int8_t step = adjoint ? -1 : 1;
      for (const auto& [key, amp] : js.comps) {
        if (key.first != arm_idx) {
          accumulate(next, key, amp);
          continue;
        }
        JointState::Key shifted = key;
        shifted.second[slot_idx] =
            static_cast<std::int8_t>(shifted.second[slot_idx] + step);
        if (std::abs(shifted.second[slot_idx]) > 1) {
          throw Error("internal: displacement register out of range");
        }
        accumulate(next, std::move(shifted), amp);
      }
    }
    js.comps = std::move(next);
  }

  void apply_op(JointState& js, const Operator& op, std::size_t to_cut) const {
    std::map<JointState::Key, Amplitude> next;
    for (const auto& [key, amp] : js.comps) {
      for (const auto& e : op.entries()) {
        if (e.col != key.first) continue;
        accumulate(next,
                   {static_cast<std::uint32_t>(e.row), key.second},
                   e.value * amp);
      }
    }
    js.comps = std::move(next);
    js.arms = plan_.cut_basis(to_cut);
    js.stage = plan_.cuts()[to_cut].name;
  }

  /// Advance a state sitting at `cut` (couplings there already applied) up
  /// to `target`.
  void forward_from(JointState& js, std::size_t cut, std::size_t target) const {
    for (std::size_t k = cut; k < target; ++k) {
      apply_op(js, plan_.ops()[k], k + 1);
      for (const std::size_t slot : fire_at_[k + 1]) {
        apply_coupling(js, slot, false);
      }
    }
  }

  JointState forward_to(const Preselection& pre, std::size_t target) const {
    JointState js = make_state(pre.state, 0);
    for (const std::size_t slot : fire_at_[0]) apply_coupling(js, slot, false);
    forward_from(js, 0, target);
    return js;
  }

  /// Backward ket at `target`: post-selection and initial pointer states
  /// pulled back through the adjoints of everything after the cut.
  JointState backward_to(const Postselection& post, std::size_t target) const {
    const std::size_t last = plan_.cut_count() - 1;
    JointState js = make_state(post.state, last);
    for (std::size_t k = last; k > target; --k) {
      for (auto it = fire_at_[k].rbegin(); it != fire_at_[k].rend(); ++it) {
        apply_coupling(js, *it, true);
      }
      apply_op(js, plan_.ops()[k - 1].adjoint(), k - 1);
    }
    return js;
  }

  /// Gram inner product <a|b> of two states at the same cut.
  Amplitude gram_inner(const JointState& a, const JointState& b,
                       std::optional<std::uint32_t> only_arm = {}) const {
    Amplitude sum{};
    for (const auto& [ka, va] : a.comps) {
      if (only_arm && ka.first != *only_arm) continue;
      for (const auto& [kb, vb] : b.comps) {
        if (kb.first != ka.first) continue;
        const double g = reg_->gram(ka.second, kb.second);
        if (g != 0.0) sum += std::conj(va) * vb * g;
      }
    }
    return sum;
  }

 private:
  StagePlan plan_;
  std::shared_ptr<const ProbeRegistry> reg_;
  std::vector<std::vector<std::size_t>> fire_at_;
};

PointerState project_onto(const JointState& js, const PureState& outcome) {
  const PureState mapped = outcome.remapped(js.arms);
  PointerState ps;
  ps.registry = js.registry;
  for (const auto& [key, amp] : js.comps) {
    const Amplitude weighted = std::conj(mapped.amps[key.first]) * amp;
    if (is_zero(weighted)) continue;
    auto [it, inserted] = ps.comps.emplace(key.second, weighted);
    if (!inserted) {
      it->second += weighted;
      if (is_zero(it->second)) ps.comps.erase(it);
    }
  }
  return ps;
}

double pointer_norm_squared(const PointerState& ps) {
  double n = 0.0;
  for (const auto& [ka, va] : ps.comps) {
    for (const auto& [kb, vb] : ps.comps) {
      const double g = ps.registry->gram(ka, kb);
      if (g != 0.0) n += (std::conj(va) * vb).real() * g;
    }
  }
  return n;
}

}  // namespace

double JointState::norm_squared() const {
  double n = 0.0;
  for (const auto& [ka, va] : comps) {
    for (const auto& [kb, vb] : comps) {
      if (ka.first != kb.first) continue;
      const double g = registry->gram(ka.second, kb.second);
      if (g != 0.0) n += (std::conj(va) * vb).real() * g;
    }
  }
  return n;
}

double JointState::arm_probability(std::string_view arm) const {
  const auto idx = arms.find(arm);
  if (!idx) throw Error("unknown arm '" + std::string(arm) + "'");
  double n = 0.0;
  for (const auto& [ka, va] : comps) {
    if (ka.first != *idx) continue;
    for (const auto& [kb, vb] : comps) {
      if (kb.first != *idx) continue;
      const double g = registry->gram(ka.second, kb.second);
      if (g != 0.0) n += (std::conj(va) * vb).real() * g;
    }
  }
  return n;
}

JointState evolve_joint(const InstrumentedNetwork& in, const Preselection& pre) {
  const JointEngine engine(in);
  return engine.forward_to(pre, engine.plan().cut_count() - 1);
}

JointState evolve_joint_at(const InstrumentedNetwork& in,
                           const Preselection& pre, std::string_view stage) {
  const JointEngine engine(in);
  return engine.forward_to(pre, engine.plan().cut_index(stage));
}

PostselectResult postselect(const JointState& js, const Postselection& post) {
  PointerState ps = project_onto(js, post.state);
  const double probability = pointer_norm_squared(ps);
  if (probability < kJointNullProbability) {
    throw NullPostselectionError(std::sqrt(std::max(probability, 0.0)));
  }
  const double scale = 1.0 / std::sqrt(probability);
  for (auto& [key, amp] : ps.comps) amp *= scale;
  return {std::move(ps), probability};
}

double trace_magnitude(const PointerState& ps, std::string_view pointer_id) {
  const ProbeRegistry& reg = *ps.registry;
  const std::size_t slot = reg.slot_index(pointer_id);
  const bool self = reg.slots[slot].kind == ProbeRegistry::SlotKind::SelfShift;

  // deficit = <psi|psi> - <psi| P_init |psi> accumulated per component pair,
  // so registers that were never touched contribute exact zeros.
  double deficit = 0.0;
  double norm = 0.0;
  for (const auto& [ka, va] : ps.comps) {
    for (const auto& [kb, vb] : ps.comps) {
      double partial = 1.0;  // all factors except the probed register
      for (std::size_t i = 0; i < reg.slots.size(); ++i) {
        if (i == slot && !self) continue;
        switch (reg.slots[i].kind) {
          case ProbeRegistry::SlotKind::Qubit:
            if (ka[i] != kb[i]) partial = 0.0;
            break;
          case ProbeRegistry::SlotKind::Gaussian:
            if (ka[i] != kb[i]) {
              partial *= gaussian_overlap(ka[i] * reg.slots[i].delta,
                                          kb[i] * reg.slots[i].delta,
                                          reg.slots[i].sigma);
            }
            break;
          case ProbeRegistry::SlotKind::SelfShift:
            break;
        }
        if (partial == 0.0) break;
      }
      if (partial == 0.0) continue;

      double g_slot;  // probed-register factor of the Gram product
      double p_slot;  // probed-register factor of <.|init><init|.>
      if (self) {
        const double ca = reg.self_center(ka);
        const double cb = reg.self_center(kb);
        g_slot = gaussian_overlap(ca, cb, reg.self_sigma);
        p_slot = gaussian_overlap(ca, 0.0, reg.self_sigma) *
                 gaussian_overlap(0.0, cb, reg.self_sigma);
      } else if (reg.slots[slot].kind == ProbeRegistry::SlotKind::Qubit) {
        g_slot = ka[slot] == kb[slot] ? 1.0 : 0.0;
        p_slot = (ka[slot] == 0 && kb[slot] == 0) ? 1.0 : 0.0;
      } else {
        const double da = ka[slot] * reg.slots[slot].delta;
        const double db = kb[slot] * reg.slots[slot].delta;
        const double sigma = reg.slots[slot].sigma;
        g_slot = gaussian_overlap(da, db, sigma);
        p_slot = gaussian_overlap(da, 0.0, sigma) *
                 gaussian_overlap(0.0, db, sigma);
      }
      const double weight = (std::conj(va) * vb).real();
      norm += weight * partial * g_slot;
      deficit += weight * partial * (g_slot - p_slot);
    }
  }
  if (norm <= 0.0) throw Error("empty pointer state");
  return std::sqrt(std::max(0.0, deficit / norm));
}

double pointer_mean(const PointerState& ps, std::string_view pointer_id) {
  const ProbeRegistry& reg = *ps.registry;
  const std::size_t slot = reg.slot_index(pointer_id);
  const auto kind = reg.slots[slot].kind;
  if (kind == ProbeRegistry::SlotKind::Qubit) {
    throw Error("pointer '" + std::string(pointer_id) +
                "' has no position coordinate");
  }
  const bool self = kind == ProbeRegistry::SlotKind::SelfShift;
  const double sigma = self ? reg.self_sigma : reg.slots[slot].sigma;

  double num = 0.0;
  double den = 0.0;
  for (const auto& [ka, va] : ps.comps) {
    for (const auto& [kb, vb] : ps.comps) {
      double partial = 1.0;
      for (std::size_t i = 0; i < reg.slots.size(); ++i) {
        if (i == slot && !self) continue;
        switch (reg.slots[i].kind) {
          case ProbeRegistry::SlotKind::Qubit:
            if (ka[i] != kb[i]) partial = 0.0;
            break;
          case ProbeRegistry::SlotKind::Gaussian:
            if (ka[i] != kb[i]) {
              partial *= gaussian_overlap(ka[i] * reg.slots[i].delta,
                                          kb[i] * reg.slots[i].delta,
                                          reg.slots[i].sigma);
            }
            break;
          case ProbeRegistry::SlotKind::SelfShift:
            break;
        }
        if (partial == 0.0) break;
      }
      if (partial == 0.0) continue;
      const double da =
          self ? reg.self_center(ka) : ka[slot] * reg.slots[slot].delta;
      const double db =
          self ? reg.self_center(kb) : kb[slot] * reg.slots[slot].delta;
      const double weight = (std::conj(va) * vb).real();
      num += weight * partial * gaussian_cross_moment(da, db, sigma);
      den += weight * partial * gaussian_overlap(da, db, sigma);
    }
  }
  if (den <= 0.0) throw Error("empty pointer state");
  return num / den;
}

double arm_exit_probability(const InstrumentedNetwork& in,
                            const Preselection& pre, std::string_view arm) {
  const JointEngine engine(in);
  std::size_t last_cut = 0;
  bool found = false;
  for (std::size_t i = 0; i < engine.plan().cut_count(); ++i) {
    if (engine.plan().cut_basis(i).contains(arm)) {
      last_cut = i;
      found = true;
    }
  }
  if (!found) throw Error("unknown arm '" + std::string(arm) + "'");
  return engine.forward_to(pre, last_cut).arm_probability(arm);
}

double joint_flip_signal(const InstrumentedNetwork& in, const Preselection& pre,
                         const Postselection& post) {
  const JointEngine engine(in);
  const auto& slots = engine.registry()->slots;
  const bool two_qubits =
      slots.size() == 2 &&
      std::all_of(slots.begin(), slots.end(), [](const auto& s) {
        return s.kind == ProbeRegistry::SlotKind::Qubit;
      });
  if (!two_qubits) {
    throw Error("joint_flip_signal requires exactly two qubit probes");
  }
  const JointState js =
      engine.forward_to(pre, engine.plan().cut_count() - 1);
  const PointerState ps = project_onto(js, post.state);
  const auto it = ps.comps.find(JointState::Levels{1, 1});
  return it == ps.comps.end() ? 0.0 : std::abs(it->second);
}

Amplitude joint_overlap(const InstrumentedNetwork& in, const Preselection& pre,
                        const Postselection& post, std::string_view stage) {
  const JointEngine engine(in);
  const std::size_t cut = engine.plan().cut_index(stage);
  return engine.gram_inner(engine.backward_to(post, cut),
                           engine.forward_to(pre, cut));
}

std::map<std::string, Amplitude> instrumented_weak_values(
    const InstrumentedNetwork& in, const Preselection& pre,
    const Postselection& post, std::string_view stage, double null_threshold) {
  const JointEngine engine(in);
  const std::size_t cut = engine.plan().cut_index(stage);
  const JointState fwd = engine.forward_to(pre, cut);
  const JointState bwd = engine.backward_to(post, cut);
  const Amplitude overlap = engine.gram_inner(bwd, fwd);
  if (std::abs(overlap) <= null_threshold) {
    throw NullPostselectionError(std::abs(overlap));
  }
  std::map<std::string, Amplitude> values;
  const Basis& basis = engine.plan().cut_basis(cut);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    values[basis.label(i).name] =
        engine.gram_inner(bwd, fwd, static_cast<std::uint32_t>(i)) / overlap;
  }
  return values;
}

std::map<std::string, double> unread_weak_value_magnitudes(
    const InstrumentedNetwork& in, const Preselection& pre,
    const Postselection& post, std::string_view stage, double null_threshold) {
  const JointEngine engine(in);
  const std::size_t cut = engine.plan().cut_index(stage);
  const std::size_t last = engine.plan().cut_count() - 1;
  const JointState at_stage = engine.forward_to(pre, cut);

  JointState full = at_stage;
  engine.forward_from(full, cut, last);
  const double denominator =
      std::sqrt(pointer_norm_squared(project_onto(full, post.state)));
  if (denominator <= null_threshold) {
    throw NullPostselectionError(denominator);
  }

  std::map<std::string, double> magnitudes;
  const Basis& basis = engine.plan().cut_basis(cut);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    JointState restricted = at_stage;
    std::erase_if(restricted.comps, [&](const auto& entry) {
      return entry.first.first != i;
    });
    engine.forward_from(restricted, cut, last);
    const double numerator =
        std::sqrt(pointer_norm_squared(project_onto(restricted, post.state)));
    magnitudes[basis.label(i).name] = numerator / denominator;
  }
  return magnitudes;
}

std::map<std::string, double> detector_intensities(
    const InstrumentedNetwork& in, const Preselection& pre) {
  const JointState js = evolve_joint(in, pre);
  std::map<std::string, double> intensities;
  for (const auto& [name, arm] : in.network().detectors()) {
    intensities[name] = js.arm_probability(arm);
  }
  return intensities;
}

TraceEstimate estimate_order(const std::function<double(double)>& trace_at,
                             std::string arm, std::span<const double> grid,
                             double residual_bound, double zero_floor) {
  if (grid.size() < 3) {
    throw Error("order estimation needs at least 3 grid strengths");
  }
  std::vector<double> strengths(grid.begin(), grid.end());
  for (const double eps : strengths) {
    if (!(eps > 0.0)) throw Error("non-positive strength in grid");
  }
  std::sort(strengths.begin(), strengths.end(), std::greater<>());
  if (std::adjacent_find(strengths.begin(), strengths.end()) !=
      strengths.end()) {
    throw Error("grid strengths must be distinct");
  }

  TraceEstimate est;
  est.arm = std::move(arm);
  for (const double eps : strengths) {
    est.samples.emplace_back(eps, trace_at(eps));
  }
  est.magnitude = est.samples.front().second;

  const bool all_zero =
      std::all_of(est.samples.begin(), est.samples.end(),
                  [&](const auto& s) { return s.second < zero_floor; });
  if (all_zero) {
    est.order = std::numeric_limits<double>::infinity();
    est.fit_residual = 0.0;
    return est;
  }

  std::vector<std::pair<double, double>> logs;
  for (const auto& [eps, mag] : est.samples) {
    if (mag >= zero_floor) logs.emplace_back(std::log(eps), std::log(mag));
  }
  if (logs.size() < 2) {
    est.fit_residual = std::numeric_limits<double>::infinity();
    return est;
  }

  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= logs.size();
  my /= logs.size();
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (const auto& [x, y] : logs) {
    const double e = y - (slope * x + intercept);
    rss += e * e;
  }
  est.fit_residual = std::sqrt(rss / logs.size());
  if (est.fit_residual < residual_bound) est.order = slope;
  return est;
}

}  // namespace weaktrace
