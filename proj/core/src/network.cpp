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

#include "weaktrace/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace weaktrace {

namespace {

constexpr double kBsUnitarityTol = 1e-12;

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    if (comma == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return parts;
}

double parse_number(std::size_t line_no, const std::string& key,
                    std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line_no, "invalid number '" + std::string(text) +
                                  "' for key '" + key + "'");
  }
  return value;
}

// key=value fields after the element name; duplicate or unknown keys reject.
class FieldMap {
 public:
  FieldMap(std::size_t line_no, const std::vector<std::string>& tokens,
           std::size_t first, const std::set<std::string>& allowed)
      : line_no_(line_no) {
    for (std::size_t i = first; i < tokens.size(); ++i) {
      const auto& tok = tokens[i];
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError(line_no, "expected key=value, got '" + tok + "'");
      }
      const std::string key = tok.substr(0, eq);
      if (!allowed.count(key)) {
        throw ParseError(line_no, "unknown key '" + key + "'");
      }
      if (!fields_.emplace(key, tok.substr(eq + 1)).second) {
        throw ParseError(line_no, "duplicate key '" + key + "'");
      }
    }
  }

  const std::string& get(const std::string& key) const {
    auto it = fields_.find(key);
    if (it == fields_.end()) {
      throw ParseError(line_no_, "missing key '" + key + "'");
    }
    return it->second;
  }

  double number(const std::string& key) const {
    return parse_number(line_no_, key, get(key));
  }

  std::vector<std::string> arm_list(const std::string& key,
                                    std::size_t expected = 0) const {
    auto parts = split_commas(get(key));
    for (const auto& p : parts) {
      if (!is_identifier(p)) {
        throw ParseError(line_no_, "invalid arm label '" + p + "'");
      }
    }
    if (expected != 0 && parts.size() != expected) {
      throw ParseError(line_no_, "key '" + key + "' expects " +
                                     std::to_string(expected) + " arm(s)");
    }
    return parts;
  }

 private:
  std::size_t line_no_;
  std::map<std::string, std::string> fields_;
};

std::string unique_name(std::string base,
                        const std::unordered_set<std::string>& taken) {
  std::string candidate = std::move(base);
  while (taken.count(candidate)) candidate += "_";
  return candidate;
}

}  // namespace

const Element& Network::element(std::string_view name) const {
  for (const auto& e : elements_) {
    if (e.name == name) return e;
  }
  throw Error("unknown element '" + std::string(name) + "'");
}

bool Network::has_arm(std::string_view name) const {
  return std::find(arms_.begin(), arms_.end(), name) != arms_.end();
}

bool Network::is_vacuum_arm(std::string_view name) const {
  return std::find(vacuum_arms_.begin(), vacuum_arms_.end(), name) !=
         vacuum_arms_.end();
}

Network Network::from_elements(std::vector<Element> elements,
                               std::vector<StageCut> declared_stages) {
  Network net;
  net.elements_ = std::move(elements);
  net.validate_and_plan(std::move(declared_stages));
  return net;
}

void Network::validate_and_plan(std::vector<StageCut> declared) {
  std::unordered_map<std::string, std::size_t> producer;  // arm -> element idx
  std::unordered_map<std::string, std::size_t> consumer;
  std::unordered_set<std::string> element_names;

  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const Element& e = elements_[i];
    if (!is_identifier(e.name)) {
      throw ValidationError("invalid element name '" + e.name + "'");
    }
    if (!element_names.insert(e.name).second) {
      throw ValidationError("duplicate element name '" + e.name + "'");
    }

    std::size_t want_in = 0;
    std::size_t want_out = 0;
    if (std::holds_alternative<SourceTag>(e.params)) {
      want_in = 0;
      want_out = 1;
    } else if (std::holds_alternative<BeamSplitter>(e.params)) {
      want_in = 2;
      want_out = 2;
      const auto& bs = std::get<BeamSplitter>(e.params);
      if (bs.t < 0.0 || bs.r < 0.0 ||
          std::abs(bs.t * bs.t + bs.r * bs.r - 1.0) > kBsUnitarityTol) {
        std::ostringstream msg;
        msg << "beam splitter '" << e.name
            << "' not unitary: t^2 + r^2 = " << bs.t * bs.t + bs.r * bs.r;
        throw ValidationError(msg.str());
      }
    } else if (std::holds_alternative<PhaseShifter>(e.params) ||
               std::holds_alternative<TransversalShifter>(e.params) ||
               std::holds_alternative<MirrorTag>(e.params)) {
      want_in = 1;
      want_out = 1;
    } else if (std::holds_alternative<BlockTag>(e.params)) {
      want_in = 1;
      want_out = 0;
      has_block_ = true;
    } else {  // Detector
      want_in = 1;
      want_out = 0;
    }
    if (e.in_arms.size() != want_in || e.out_arms.size() != want_out) {
      throw ValidationError("element '" + e.name +
                            "' has the wrong number of arms");
    }

    for (const auto& arm : e.out_arms) {
      if (!is_identifier(arm)) {
        throw ValidationError("invalid arm label '" + arm + "'");
      }
      if (!producer.emplace(arm, i).second) {
        throw ValidationError("arm '" + arm + "' has two producers");
      }
    }
    for (const auto& arm : e.in_arms) {
      if (!is_identifier(arm)) {
        throw ValidationError("invalid arm label '" + arm + "'");
      }
      if (!consumer.emplace(arm, i).second) {
        throw ValidationError("arm '" + arm + "' has two consumers");
      }
    }
    if (e.is_source()) sources_.emplace_back(e.name, e.out_arms.front());
    if (e.is_detector()) detectors_.emplace_back(e.name, e.in_arms.front());
    if (const auto* sh = std::get_if<TransversalShifter>(&e.params)) {
      shifts_.push_back({e.name, e.out_arms.front(), sh->delta});
    }
  }

  if (sources_.empty()) throw ValidationError("no source");

  // Produced arms must go somewhere; consumed-but-unproduced arms are
  // implicit vacuum inputs carrying zero amplitude from the source cut.
  for (const auto& [arm, idx] : producer) {
    if (!consumer.count(arm)) {
      throw ValidationError("dangling arm '" + arm + "' (produced by '" +
                            elements_[idx].name +
                            "' but never consumed; add a detector or block)");
    }
  }
  std::vector<std::string> vacuum;
  for (const auto& [arm, idx] : consumer) {
    if (!producer.count(arm)) vacuum.push_back(arm);
  }
  std::sort(vacuum.begin(), vacuum.end());
  vacuum_arms_ = vacuum;

  arms_.clear();
  for (const auto& e : elements_) {
    for (const auto& arm : e.out_arms) arms_.push_back(arm);
  }
  arms_.insert(arms_.end(), vacuum.begin(), vacuum.end());

  // Execution walk: Kahn's algorithm over transforming elements with a
  // lexicographic tie-break, tracking the ordered live arm set per cut.
  std::vector<std::string> live;
  for (const auto& [src, arm] : sources_) live.push_back(arm);
  live.insert(live.end(), vacuum.begin(), vacuum.end());

  std::vector<std::vector<std::string>> cut_arms{live};
  std::vector<bool> done(elements_.size(), false);
  schedule_.clear();
  std::size_t remaining = 0;
  for (const auto& e : elements_) {
    if (e.transforms()) ++remaining;
  }

  const auto arm_live = [&](const std::string& arm) {
    return std::find(live.begin(), live.end(), arm) != live.end();
  };

  while (remaining > 0) {
    std::size_t next = elements_.size();
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      const Element& e = elements_[i];
      if (done[i] || !e.transforms()) continue;
      if (!std::all_of(e.in_arms.begin(), e.in_arms.end(), arm_live)) continue;
      next = i;  // first ready element in declaration order
      break;
    }
    if (next == elements_.size()) {
      for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (!done[i] && elements_[i].transforms()) {
          throw ValidationError("network contains a cycle or unreachable "
                                "element '" +
                                elements_[i].name + "'");
        }
      }
      throw ValidationError("network contains a cycle");
    }
    const Element& e = elements_[next];
    done[next] = true;
    --remaining;
    schedule_.push_back(next);

    if (std::holds_alternative<BeamSplitter>(e.params)) {
      *std::find(live.begin(), live.end(), e.in_arms[0]) = e.out_arms[0];
      *std::find(live.begin(), live.end(), e.in_arms[1]) = e.out_arms[1];
    } else if (e.is_block()) {
      live.erase(std::find(live.begin(), live.end(), e.in_arms[0]));
    } else {
      *std::find(live.begin(), live.end(), e.in_arms[0]) = e.out_arms[0];
    }
    cut_arms.push_back(live);
  }

  // Terminal arms must feed detectors (blocks already consumed theirs).
  for (const auto& arm : cut_arms.back()) {
    const auto it = consumer.find(arm);
    if (it == consumer.end()) continue;  // vacuum arm consumed upstream only
    if (!elements_[it->second].is_detector() &&
        !done[it->second]) {
      throw ValidationError("internal: unscheduled consumer of '" + arm + "'");
    }
  }

  // Resolve declared stages against computed cut positions. Vacuum arms are
  // ignored when matching; declared order defines the basis order.
  const auto nonvacuum_set = [&](const std::vector<std::string>& arms) {
    std::set<std::string> s;
    for (const auto& a : arms) {
      if (!is_vacuum_arm(a)) s.insert(a);
    }
    return s;
  };

  std::vector<std::string> cut_names(cut_arms.size());
  std::set<std::string> stage_names;
  std::vector<bool> position_named(cut_arms.size(), false);
  for (const auto& stage : declared) {
    if (!stage_names.insert(stage.name).second) {
      throw ValidationError("duplicate stage name '" + stage.name + "'");
    }
    std::set<std::string> declared_nonvac;
    for (const auto& arm : stage.arms) {
      if (!consumer.count(arm) && !producer.count(arm)) {
        throw ValidationError("stage '" + stage.name +
                              "' references unknown arm '" + arm + "'");
      }
      if (!is_vacuum_arm(arm)) declared_nonvac.insert(arm);
    }
    std::size_t match = cut_arms.size();
    for (std::size_t pos = 0; pos < cut_arms.size(); ++pos) {
      if (nonvacuum_set(cut_arms[pos]) != declared_nonvac) continue;
      if (match != cut_arms.size()) {
        throw ValidationError("stage '" + stage.name +
                              "' matches more than one cut");
      }
      match = pos;
    }
    if (match == cut_arms.size()) {
      throw ValidationError("stage '" + stage.name +
                            "' does not correspond to any cut of the network");
    }
    if (position_named[match]) {
      throw ValidationError("stage '" + stage.name +
                            "' duplicates an already named cut");
    }
    position_named[match] = true;
    cut_names[match] = stage.name;

    // Reorder: declared arms first, unmentioned (vacuum) arms appended in
    // their current relative order.
    std::vector<std::string> reordered;
    for (const auto& arm : stage.arms) reordered.push_back(arm);
    for (const auto& arm : cut_arms[match]) {
      if (std::find(reordered.begin(), reordered.end(), arm) ==
          reordered.end()) {
        reordered.push_back(arm);
      }
    }
    if (reordered.size() != cut_arms[match].size()) {
      throw ValidationError("stage '" + stage.name + "' lists an arm twice");
    }
    cut_arms[match] = std::move(reordered);
  }

  for (std::size_t pos = 0; pos < cut_arms.size(); ++pos) {
    if (cut_names[pos].empty()) {
      cut_names[pos] =
          pos == 0 ? "source" : elements_[schedule_[pos - 1]].name + ".out";
    }
    if (pos > 0 &&
        std::count(cut_names.begin(), cut_names.end(), cut_names[pos]) > 1) {
      throw ValidationError("cut name collision on '" + cut_names[pos] + "'");
    }
  }

  cuts_.clear();
  for (std::size_t pos = 0; pos < cut_arms.size(); ++pos) {
    cuts_.push_back({cut_names[pos], cut_arms[pos]});
  }
}

Network build_network(std::string_view spec_text) {
  std::vector<Element> elements;
  std::vector<StageCut> stages;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= spec_text.size()) {
    const auto nl = spec_text.find('\n', start);
    std::string_view line = spec_text.substr(
        start, nl == std::string_view::npos ? spec_text.size() - start
                                            : nl - start);
    start = nl == std::string_view::npos ? spec_text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;

    const std::string& kind = tokens[0];
    if (tokens.size() < 2) {
      throw ParseError(line_no, "missing name after '" + kind + "'");
    }
    const std::string& name = tokens[1];
    if (!is_identifier(name)) {
      throw ParseError(line_no, "invalid name '" + name + "'");
    }

    if (kind == "source") {
      if (tokens.size() != 4 || tokens[2] != "->" ||
          !is_identifier(tokens[3])) {
        throw ParseError(line_no, "expected: source NAME -> ARM");
      }
      elements.push_back({name, SourceTag{}, {}, {tokens[3]}});
    } else if (kind == "bs") {
      FieldMap f(line_no, tokens, 2, {"t", "r", "in", "out"});
      elements.push_back({name, BeamSplitter{f.number("t"), f.number("r")},
                          f.arm_list("in", 2), f.arm_list("out", 2)});
    } else if (kind == "ps") {
      FieldMap f(line_no, tokens, 2, {"phi", "in", "out"});
      elements.push_back({name, PhaseShifter{f.number("phi")},
                          f.arm_list("in", 1), f.arm_list("out", 1)});
    } else if (kind == "shift") {
      FieldMap f(line_no, tokens, 2, {"delta", "in", "out"});
      elements.push_back({name, TransversalShifter{f.number("delta")},
                          f.arm_list("in", 1), f.arm_list("out", 1)});
    } else if (kind == "mirror") {
      FieldMap f(line_no, tokens, 2, {"in", "out"});
      elements.push_back(
          {name, MirrorTag{}, f.arm_list("in", 1), f.arm_list("out", 1)});
    } else if (kind == "block") {
      FieldMap f(line_no, tokens, 2, {"in"});
      elements.push_back({name, BlockTag{}, f.arm_list("in", 1), {}});
    } else if (kind == "det") {
      FieldMap f(line_no, tokens, 2, {"in"});
      elements.push_back({name, DetectorTag{}, f.arm_list("in", 1), {}});
    } else if (kind == "stage") {
      FieldMap f(line_no, tokens, 2, {"arms"});
      stages.push_back({name, f.arm_list("arms")});
    } else {
      throw ParseError(line_no, "unknown element kind '" + kind + "'");
    }
  }

  return Network::from_elements(std::move(elements), std::move(stages));
}

namespace {

Operator stage_operator(const Element& e, const Basis& from, const Basis& to) {
  std::vector<Operator::Entry> entries;
  const auto consumed = [&](const BasisLabel& label) {
    return std::find(e.in_arms.begin(), e.in_arms.end(), label.name) !=
           e.in_arms.end();
  };
  for (std::size_t col = 0; col < from.size(); ++col) {
    const auto& label = from.label(col);
    if (consumed(label)) continue;
    entries.push_back({to.index_of(label.name), col, Amplitude{1.0, 0.0}});
  }
  if (const auto* bs = std::get_if<BeamSplitter>(&e.params)) {
    const std::size_t in1 = from.index_of(e.in_arms[0]);
    const std::size_t in2 = from.index_of(e.in_arms[1]);
    const std::size_t out1 = to.index_of(e.out_arms[0]);
    const std::size_t out2 = to.index_of(e.out_arms[1]);
    const Amplitude tt{bs->t, 0.0};
    const Amplitude ir{0.0, bs->r};
    entries.push_back({out1, in1, tt});
    entries.push_back({out1, in2, ir});
    entries.push_back({out2, in1, ir});
    entries.push_back({out2, in2, tt});
  } else if (const auto* ps = std::get_if<PhaseShifter>(&e.params)) {
    entries.push_back({to.index_of(e.out_arms[0]), from.index_of(e.in_arms[0]),
                       std::polar(1.0, ps->phi)});
  } else if (std::holds_alternative<TransversalShifter>(e.params) ||
             std::holds_alternative<MirrorTag>(e.params)) {
    entries.push_back({to.index_of(e.out_arms[0]), from.index_of(e.in_arms[0]),
                       Amplitude{1.0, 0.0}});
  } else if (e.is_block()) {
    // absorbed: the blocked column stays zero
  } else {
    throw Error("element '" + e.name + "' has no stage operator");
  }
  return Operator(to, from, std::move(entries));
}

}  // namespace

Operator unitary_of(const Element& e, const Basis& cut) {
  for (const auto& arm : e.in_arms) cut.index_of(arm);  // arm not in basis?
  std::vector<BasisLabel> target;
  for (const auto& label : cut.labels()) {
    const auto it = std::find(e.in_arms.begin(), e.in_arms.end(), label.name);
    if (it == e.in_arms.end()) {
      target.push_back(label);
      continue;
    }
    const std::size_t slot = it - e.in_arms.begin();
    if (slot < e.out_arms.size()) {
      target.push_back(arm_label(e.out_arms[slot]));
    }  // block: slot dropped
  }
  return stage_operator(e, cut, Basis(std::move(target)));
}

StagePlan::StagePlan(Network net) : net_(std::move(net)) {
  bases_.reserve(net_.cuts().size());
  for (const auto& cut : net_.cuts()) bases_.push_back(Basis::arms(cut.arms));
  ops_.reserve(net_.schedule().size());
  for (std::size_t i = 0; i < net_.schedule().size(); ++i) {
    const Element& e = net_.elements()[net_.schedule()[i]];
    ops_.push_back(stage_operator(e, bases_[i], bases_[i + 1]));
  }
}

std::size_t StagePlan::cut_index(std::string_view name) const {
  const auto& cuts = net_.cuts();
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i].name == name) return i;
  }
  throw Error("unknown stage '" + std::string(name) + "'");
}

std::size_t StagePlan::first_cut_of_arm(std::string_view arm) const {
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    if (bases_[i].contains(arm)) return i;
  }
  throw Error("unknown arm '" + std::string(arm) + "'");
}

const std::string& StagePlan::detector_arm(std::string_view detector) const {
  for (const auto& [name, arm] : net_.detectors()) {
    if (name == detector) return arm;
  }
  throw Error("unknown detector '" + std::string(detector) + "'");
}

Network block_arm(const Network& n, std::string_view arm) {
  if (!n.has_arm(arm)) throw Error("unknown arm '" + std::string(arm) + "'");

  std::unordered_set<std::string> arm_names(n.arms().begin(), n.arms().end());
  std::unordered_set<std::string> element_names;
  for (const auto& e : n.elements()) element_names.insert(e.name);

  std::vector<Element> elements = n.elements();
  const std::string vacuum_arm =
      unique_name(std::string(arm) + "__cut", arm_names);
  for (auto& e : elements) {
    for (auto& in : e.in_arms) {
      if (in == arm) in = vacuum_arm;
    }
  }
  // The block goes right behind the producer so that the absorbed arm does
  // not linger through downstream cuts.
  const Element block{unique_name("blk_" + std::string(arm), element_names),
                      BlockTag{},
                      {std::string(arm)},
                      {}};
  auto insert_at = elements.begin();
  for (auto it = elements.begin(); it != elements.end(); ++it) {
    if (std::find(it->out_arms.begin(), it->out_arms.end(), arm) !=
        it->out_arms.end()) {
      insert_at = it + 1;
      break;
    }
  }
  elements.insert(insert_at, block);

  // Declared cuts that cross the blocked arm downstream of the block may no
  // longer exist; keep only the stages that still match a cut.
  const Network probe = Network::from_elements(elements, {});
  const auto nonvac = [&probe](const std::vector<std::string>& arms) {
    std::set<std::string> s;
    for (const auto& a : arms) {
      if (!probe.is_vacuum_arm(a)) s.insert(a);
    }
    return s;
  };
  std::vector<StageCut> kept;
  for (const auto& stage : named_stages(n)) {
    const auto want = nonvac(stage.arms);
    std::size_t matches = 0;
    for (const auto& cut : probe.cuts()) {
      if (nonvac(cut.arms) == want) ++matches;
    }
    if (matches == 1) kept.push_back(stage);
  }
  return Network::from_elements(std::move(elements), std::move(kept));
}

std::vector<StageCut> named_stages(const Network& n) {
  std::vector<StageCut> kept;
  for (const auto& cut : n.cuts()) {
    if (cut.name == "source" || cut.name.ends_with(".out")) continue;
    StageCut copy = cut;
    std::erase_if(copy.arms, [&](const std::string& a) {
      return n.is_vacuum_arm(a);
    });
    kept.push_back(std::move(copy));
  }
  return kept;
}

}  // namespace weaktrace
