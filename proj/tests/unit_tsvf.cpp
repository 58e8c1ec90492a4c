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
#include <complex>

#include "doctest.h"
#include "weaktrace/network.hpp"
#include "weaktrace/scenarios.hpp"
#include "weaktrace/tsvf.hpp"

using namespace weaktrace;

namespace {

constexpr double kS = 0.70710678118654752;  // 1/sqrt(2)

struct Canonical {
  Network net;
  StagePlan plan;
  Preselection pre;
  Postselection post;

  Canonical()
      : net(build_network(fig1_network_text(kS))),
        plan(compile(net)),
        pre(Preselection::from_source(plan)),
        post(Postselection::on_detector(plan, "D")) {}
};

Amplitude amp(double re, double im) { return {re, im}; }

bool close(const Amplitude& a, const Amplitude& b, double tol = 1e-12) {
  return std::abs(a - b) <= tol;
}

// Fully tuned two-path interferometer: with the symmetric convention the
// first output port is dark (t^2 - r^2 = 0), giving a null post-selection.
const char* kDarkMzi =
    "source S -> s0\n"
    "bs B1 t=0.70710678118654752 r=0.70710678118654752 in=s0,v1 out=a,b\n"
    "bs B2 t=0.70710678118654752 r=0.70710678118654752 in=a,b out=o1,o2\n"
    "det N in=o1\n"
    "det Y in=o2\n";

}  // namespace

TEST_SUITE("tsvf") {

TEST_CASE("forward state through the tuned nested interferometer") {
  // Frozen by hand from one, two and three applications of the splitter
  // rule out1 = t in1 + i r in2, out2 = i r in1 + t in2.
  const Canonical c;

  const PureState l2 = forward_state(c.plan, c.pre, "L2");
  CHECK(close(l2.at("A"), amp(kS, 0)));
  CHECK(close(l2.at("B"), amp(0, kS)));

  const PureState l3 = forward_state(c.plan, c.pre, "L3");
  CHECK(close(l3.at("A"), amp(kS, 0)));
  CHECK(close(l3.at("C"), amp(0, 0.5)));
  CHECK(close(l3.at("E"), amp(-0.5, 0)));

  const PureState l4 = forward_state(c.plan, c.pre, "L4");
  CHECK(close(l4.at("A"), amp(kS, 0)));
  CHECK(std::abs(l4.at("F")) < 1e-12);  // dark port
  CHECK(close(l4.at("G"), amp(-kS, 0)));

  const PureState l5 = forward_state(c.plan, c.pre, "L5");
  CHECK(close(l5.at("d0"), amp(0.5, 0)));
  CHECK(close(l5.at("d1"), amp(0, 0.5)));

  CHECK_THROWS((void)forward_state(c.plan, c.pre, "L99"));
}

TEST_CASE("backward state pulled from detector D") {
  const Canonical c;

  const PureState l4 = backward_state(c.plan, c.post, "L4");
  CHECK(close(l4.at("A"), amp(kS, 0)));
  CHECK(close(l4.at("F"), amp(0, -kS)));
  CHECK(std::abs(l4.at("G")) < 1e-15);

  const PureState l3 = backward_state(c.plan, c.post, "L3");
  CHECK(close(l3.at("A"), amp(kS, 0)));
  CHECK(close(l3.at("C"), amp(0, -0.5)));
  CHECK(close(l3.at("E"), amp(-0.5, 0)));

  const PureState l2 = backward_state(c.plan, c.post, "L2");
  CHECK(std::abs(l2.at("B")) < 1e-12);  // dark port, time reversed
}

TEST_CASE("the overlap is stage independent and equals the D amplitude") {
  const Canonical c;
  for (const auto& cut : c.plan.cuts()) {
    const TwoStateVector tsv = two_state_vector(c.plan, c.pre, c.post,
                                                cut.name);
    CHECK(close(tsv.overlap, amp(0.5, 0)));
  }
}

TEST_CASE("identity observable has weak value one") {
  const Canonical c;
  const Operator identity = Operator::identity(c.plan.cut_basis(2));
  CHECK(close(weak_value(c.plan, c.pre, c.post, identity, "L3"),
              amp(1, 0), 1e-12));
}

TEST_CASE("canonical path weak values") {
  const Canonical c;

  const auto l3 = path_weak_values(c.plan, c.pre, c.post, "L3");
  CHECK(close(l3.at("A"), amp(1, 0), 1e-10));
  CHECK(close(l3.at("C"), amp(-0.5, 0), 1e-10));
  CHECK(close(l3.at("E"), amp(0.5, 0), 1e-10));

  const auto l2 = path_weak_values(c.plan, c.pre, c.post, "L2");
  CHECK(close(l2.at("A"), amp(1, 0), 1e-10));
  CHECK(std::abs(l2.at("B")) < 1e-10);

  const auto l4 = path_weak_values(c.plan, c.pre, c.post, "L4");
  CHECK(close(l4.at("A"), amp(1, 0), 1e-10));
  CHECK(std::abs(l4.at("F")) < 1e-10);
  CHECK(std::abs(l4.at("G")) < 1e-10);
}

TEST_CASE("path weak values sum to one at every cut") {
  const Canonical c;
  for (const auto& cut : c.plan.cuts()) {
    Amplitude sum{};
    for (const auto& [arm, v] :
         path_weak_values(c.plan, c.pre, c.post, cut.name)) {
      sum += v;
    }
    CHECK(close(sum, amp(1, 0), 1e-10));
  }
}

TEST_CASE("weak values scale with the outer splitter ratio r/(2t)") {
  for (const double t : {0.4, 0.6, 0.9}) {
    const Network net = build_network(fig1_network_text(t));
    const StagePlan plan = compile(net);
    const Preselection pre = Preselection::from_source(plan);
    const Postselection post = Postselection::on_detector(plan, "D");
    const auto values = path_weak_values(plan, pre, post, "L3");
    const double expected = std::sqrt(1.0 - t * t) / (2.0 * t);
    CHECK(close(values.at("C"), amp(-expected, 0), 1e-12));
    CHECK(close(values.at("E"), amp(expected, 0), 1e-12));
    CHECK(close(values.at("A"), amp(1, 0), 1e-12));
  }
}

TEST_CASE("weak values are linear in the observable") {
  const Canonical c;
  const Basis& basis = c.plan.cut_basis(2);
  const Operator p_c = projector({"C"}, basis);
  const Operator p_ce = projector({"C", "E"}, basis);
  const Amplitude a{0.3, -1.1};
  std::vector<Operator::Entry> mixed;
  for (const auto& e : p_c.entries()) {
    mixed.push_back({e.row, e.col, a * e.value});
  }
  for (const auto& e : p_ce.entries()) {
    mixed.push_back({e.row, e.col, Amplitude{2.0, 0.5} * e.value});
  }
  const Operator combined(basis, basis, mixed);
  const Amplitude direct =
      weak_value(c.plan, c.pre, c.post, combined, "L3");
  const Amplitude split =
      a * weak_value(c.plan, c.pre, c.post, p_c, "L3") +
      Amplitude{2.0, 0.5} * weak_value(c.plan, c.pre, c.post, p_ce, "L3");
  CHECK(close(direct, split, 1e-12));
}

TEST_CASE("time-reversed evaluation conjugates weak values") {
  // Running the plan backward swaps the two states; a complex-valued case
  // is forced with a phase shifter on C.
  Network base = build_network(fig1_network_text(kS));
  std::vector<Element> elements = base.elements();
  for (auto& e : elements) {
    for (auto& in : e.in_arms) {
      if (in == "C") in = "C_p";
    }
  }
  elements.push_back({"PSC", PhaseShifter{0.3}, {"C"}, {"C_p"}});
  const Network net = Network::from_elements(elements, named_stages(base));
  const StagePlan plan = compile(net);
  const Preselection pre = Preselection::from_source(plan);
  const Postselection post = Postselection::on_detector(plan, "D");

  const Operator obs = projector({"C"}, plan.cut_basis(plan.cut_index("L3")));
  const Amplitude wv = weak_value(plan, pre, post, obs, "L3");
  CHECK(std::abs(wv.imag()) > 1e-3);  // genuinely complex

  const PureState fwd = forward_state(plan, pre, "L3");
  const PureState bwd = backward_state(plan, post, "L3");
  const Amplitude reversed =
      inner_product(fwd, apply(obs, bwd)) / inner_product(fwd, bwd);
  CHECK(close(reversed, std::conj(wv), 1e-12));
}

TEST_CASE("null post-selection raises instead of diverging") {
  const Network net = build_network(kDarkMzi);
  const StagePlan plan = compile(net);
  const Preselection pre = Preselection::from_source(plan);
  const Postselection post = Postselection::on_detector(plan, "N");
  const Operator obs = projector({"a"}, plan.cut_basis(1));
  CHECK_THROWS_AS(
      (void)weak_value(plan, pre, post, obs, plan.cuts()[1].name),
      NullPostselectionError);
}

TEST_CASE("presence classification on the canonical network") {
  const Canonical c;

  const PresenceVerdict l3 = presence_map(c.plan, c.pre, c.post, "L3");
  CHECK(l3.verdicts.at("A") == Presence::Present);
  CHECK(l3.verdicts.at("C") == Presence::Present);
  CHECK(l3.verdicts.at("E") == Presence::Present);

  const PresenceVerdict l2 = presence_map(c.plan, c.pre, c.post, "L2");
  CHECK(l2.verdicts.at("A") == Presence::Present);
  CHECK(l2.verdicts.at("B") == Presence::Secondary);

  const PresenceVerdict l4 = presence_map(c.plan, c.pre, c.post, "L4");
  CHECK(l4.verdicts.at("F") == Presence::Secondary);
  CHECK(l4.verdicts.at("G") == Presence::Absent);

  const PresenceVerdict l5 = presence_map(c.plan, c.pre, c.post, "L5");
  CHECK(l5.verdicts.at("d0") == Presence::Present);
  CHECK(l5.verdicts.at("d1") == Presence::Absent);
}

TEST_CASE("presence is invariant under global phases of the selections") {
  const Canonical c;
  const PresenceVerdict reference = presence_map(c.plan, c.pre, c.post, "L4");
  for (const double theta : {0.7, 2.1, -1.3}) {
    PureState pre_state = c.pre.state;
    for (auto& a : pre_state.amps) a *= std::polar(1.0, theta);
    PureState post_state = c.post.state;
    for (auto& a : post_state.amps) a *= std::polar(1.0, -0.5 * theta);
    const PresenceVerdict shifted =
        presence_map(c.plan, Preselection(pre_state),
                     Postselection(post_state, "D"), "L4");
    CHECK(shifted.verdicts == reference.verdicts);
  }
}

TEST_CASE("preselection and postselection must be normalized") {
  const Canonical c;
  PureState bad = c.pre.state;
  bad.amps[0] *= 2.0;
  CHECK_THROWS_AS((void)Preselection(bad), ValidationError);
}

}  // TEST_SUITE
