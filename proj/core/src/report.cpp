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

#include "weaktrace/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace weaktrace {

bool ScenarioReport::all_annotations_pass() const {
  return std::all_of(annotations.begin(), annotations.end(),
                     [](const Annotation& a) { return a.pass; });
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // canonical zero, no negative-zero noise
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Minimal streaming JSON writer with fixed field order.
class JsonWriter {
 public:
  void begin_object() {
    sep();
    out_ << '{';
    need_comma_ = false;
  }
  void end_object() {
    out_ << '}';
    need_comma_ = true;
  }
  void key(const std::string& k) {
    sep();
    out_ << '"' << json_escape(k) << "\":";
    need_comma_ = false;
  }
  void string(const std::string& v) {
    sep();
    out_ << '"' << json_escape(v) << '"';
    need_comma_ = true;
  }
  void number(double v) {
    sep();
    if (std::isinf(v)) {
      out_ << (v > 0 ? "\"inf\"" : "\"-inf\"");
    } else if (std::isnan(v)) {
      out_ << "\"nan\"";
    } else {
      out_ << format_number(v);
    }
    need_comma_ = true;
  }
  void boolean(bool v) {
    sep();
    out_ << (v ? "true" : "false");
    need_comma_ = true;
  }
  void null() {
    sep();
    out_ << "null";
    need_comma_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  void sep() {
    if (need_comma_) out_ << ',';
  }
  std::ostringstream out_;
  bool need_comma_ = false;
};

void write_complex(JsonWriter& w, const Amplitude& a) {
  w.begin_object();
  w.key("re");
  w.number(a.real());
  w.key("im");
  w.number(a.imag());
  w.end_object();
}

}  // namespace

std::string to_json(const ScenarioReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("schema");
  w.string(kReportSchemaId);

  w.key("meta");
  w.begin_object();
  w.key("scenario");
  w.string(r.scenario);
  w.key("convention");
  w.string(r.convention);
  w.key("status");
  w.string(r.status);
  w.key("parameters");
  w.begin_object();
  for (const auto& [k, v] : r.parameters) {
    w.key(k);
    w.number(v);
  }
  w.end_object();
  if (!r.note.empty()) {
    w.key("note");
    w.string(r.note);
  }
  w.end_object();

  w.key("postselection");
  w.begin_object();
  w.key("detector");
  w.string(r.postselect_detector);
  w.key("probability");
  w.number(r.postselect_probability);
  w.end_object();

  w.key("stages");
  w.begin_object();
  for (const auto& stage : r.stages) {
    w.key(stage.stage);
    w.begin_object();
    for (const auto& arm : stage.arms) {
      w.key(arm.arm);
      w.begin_object();
      w.key("forward");
      write_complex(w, arm.forward);
      w.key("backward");
      write_complex(w, arm.backward);
      w.end_object();
    }
    w.end_object();
  }
  w.end_object();

  w.key("weak_values");
  w.begin_object();
  for (const auto& stage : r.weak_values) {
    w.key(stage.stage);
    w.begin_object();
    for (const auto& [arm, value] : stage.values) {
      w.key(arm);
      write_complex(w, value);
    }
    w.end_object();
  }
  w.end_object();

  if (!r.unread_magnitudes.empty()) {
    w.key("unread_magnitudes");
    w.begin_object();
    for (const auto& stage : r.unread_magnitudes) {
      w.key(stage.stage);
      w.begin_object();
      for (const auto& [arm, value] : stage.values) {
        w.key(arm);
        w.number(value);
      }
      w.end_object();
    }
    w.end_object();
  }

  w.key("presence");
  w.begin_object();
  for (const auto& stage : r.presence) {
    w.key(stage.stage);
    w.begin_object();
    for (const auto& [arm, verdict] : stage.verdicts) {
      w.key(arm);
      w.string(verdict);
    }
    w.end_object();
  }
  w.end_object();

  w.key("probes");
  w.begin_object();
  for (const auto& probe : r.probes) {
    w.key(probe.id);
    w.begin_object();
    w.key("arm");
    w.string(probe.arm);
    w.key("kind");
    w.string(probe.kind);
    w.key("strength");
    w.number(probe.strength);
    w.key("trace_magnitude");
    w.number(probe.trace_magnitude);
    w.key("order");
    if (probe.order) {
      w.number(*probe.order);
    } else {
      w.null();
    }
    w.key("residual");
    w.number(probe.residual);
    w.end_object();
  }
  w.end_object();

  w.key("detectors");
  w.begin_object();
  for (const auto& [name, intensity] : r.detectors) {
    w.key(name);
    w.number(intensity);
  }
  w.end_object();

  w.key("annotations");
  w.begin_object();
  for (const auto& a : r.annotations) {
    w.key(a.name);
    w.begin_object();
    w.key("pass");
    w.boolean(a.pass);
    w.key("measured");
    w.number(a.measured);
    if (!a.detail.empty()) {
      w.key("detail");
      w.string(a.detail);
    }
    w.end_object();
  }
  w.end_object();

  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

namespace {

std::string complex_text(const Amplitude& a) {
  return format_number(a.real()) + " " + format_number(a.imag()) + "i";
}

void flat_rows(const ScenarioReport& r,
               const std::function<void(const std::string&, const std::string&,
                                        const std::string&)>& emit) {
  emit("meta", "scenario", r.scenario);
  emit("meta", "convention", r.convention);
  emit("meta", "status", r.status);
  for (const auto& [k, v] : r.parameters) {
    emit("meta", "parameters." + k, format_number(v));
  }
  if (!r.note.empty()) emit("meta", "note", r.note);
  emit("postselection", "detector", r.postselect_detector);
  emit("postselection", "probability",
       format_number(r.postselect_probability));
  for (const auto& stage : r.stages) {
    for (const auto& arm : stage.arms) {
      emit("stages", stage.stage + "." + arm.arm + ".forward.re",
           format_number(arm.forward.real()));
      emit("stages", stage.stage + "." + arm.arm + ".forward.im",
           format_number(arm.forward.imag()));
      emit("stages", stage.stage + "." + arm.arm + ".backward.re",
           format_number(arm.backward.real()));
      emit("stages", stage.stage + "." + arm.arm + ".backward.im",
           format_number(arm.backward.imag()));
    }
  }
  for (const auto& stage : r.weak_values) {
    for (const auto& [arm, value] : stage.values) {
      emit("weak_values", stage.stage + "." + arm + ".re",
           format_number(value.real()));
      emit("weak_values", stage.stage + "." + arm + ".im",
           format_number(value.imag()));
    }
  }
  for (const auto& stage : r.unread_magnitudes) {
    for (const auto& [arm, value] : stage.values) {
      emit("unread_magnitudes", stage.stage + "." + arm,
           format_number(value));
    }
  }
  for (const auto& stage : r.presence) {
    for (const auto& [arm, verdict] : stage.verdicts) {
      emit("presence", stage.stage + "." + arm, verdict);
    }
  }
  for (const auto& probe : r.probes) {
    emit("probes", probe.id + ".arm", probe.arm);
    emit("probes", probe.id + ".kind", probe.kind);
    emit("probes", probe.id + ".strength", format_number(probe.strength));
    emit("probes", probe.id + ".trace_magnitude",
         format_number(probe.trace_magnitude));
    emit("probes", probe.id + ".order",
         probe.order ? (std::isinf(*probe.order) ? std::string("inf")
                                                  : format_number(*probe.order))
                     : std::string("null"));
    emit("probes", probe.id + ".residual", format_number(probe.residual));
  }
  for (const auto& [name, intensity] : r.detectors) {
    emit("detectors", name, format_number(intensity));
  }
  for (const auto& a : r.annotations) {
    emit("annotations", a.name + ".pass", a.pass ? "true" : "false");
    emit("annotations", a.name + ".measured", format_number(a.measured));
    if (!a.detail.empty()) emit("annotations", a.name + ".detail", a.detail);
  }
}

}  // namespace

std::string to_text_table(const ScenarioReport& r) {
  std::ostringstream out;
  out << "report " << kReportSchemaId << "\n";
  std::string section;
  flat_rows(r, [&](const std::string& sec, const std::string& path,
                   const std::string& value) {
    if (sec != section) {
      section = sec;
      out << "\n[" << section << "]\n";
    }
    out << "  " << path;
    for (std::size_t i = path.size(); i < 36; ++i) out << ' ';
    out << "  " << value << "\n";
  });
  return out.str();
}

std::string to_csv(const ScenarioReport& r) {
  std::ostringstream out;
  out << "section,path,value\n";
  flat_rows(r, [&](const std::string& sec, const std::string& path,
                   const std::string& value) {
    const auto quote = [](const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (const char c : s) {
        if (c == '"') q += "\"\"";
        else q += c;
      }
      q += "\"";
      return q;
    };
    out << sec << ',' << quote(path) << ',' << quote(value) << "\n";
  });
  return out.str();
}

std::string to_stage_table(const ScenarioReport& r) {
  std::ostringstream out;
  out << "scenario " << r.scenario << "  (" << r.convention << ")\n";
  out << "stage  arm        forward                 backward                "
         "weak value              presence\n";
  for (const auto& stage : r.stages) {
    const auto* weak = [&]() -> const ScenarioReport::WeakValueSection* {
      for (const auto& s : r.weak_values) {
        if (s.stage == stage.stage) return &s;
      }
      return nullptr;
    }();
    const auto* pres = [&]() -> const ScenarioReport::PresenceSection* {
      for (const auto& s : r.presence) {
        if (s.stage == stage.stage) return &s;
      }
      return nullptr;
    }();
    for (const auto& arm : stage.arms) {
      out << stage.stage;
      for (std::size_t i = stage.stage.size(); i < 7; ++i) out << ' ';
      out << arm.arm;
      for (std::size_t i = arm.arm.size(); i < 11; ++i) out << ' ';
      const auto pad = [&](const std::string& s, std::size_t w) {
        out << s;
        for (std::size_t i = s.size(); i < w; ++i) out << ' ';
      };
      pad(complex_text(arm.forward), 24);
      pad(complex_text(arm.backward), 24);
      std::string wv = "-";
      if (weak) {
        for (const auto& [a, v] : weak->values) {
          if (a == arm.arm) wv = complex_text(v);
        }
      }
      pad(wv, 24);
      std::string p = "-";
      if (pres) {
        for (const auto& [a, v] : pres->verdicts) {
          if (a == arm.arm) p = v;
        }
      }
      out << p << "\n";
    }
  }
  return out.str();
}

}  // namespace weaktrace
