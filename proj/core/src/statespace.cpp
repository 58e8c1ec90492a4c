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

#include "weaktrace/statespace.hpp"

#include <algorithm>
#include <cmath>

namespace weaktrace {

namespace {

bool is_finite(const Amplitude& a) {
  return std::isfinite(a.real()) && std::isfinite(a.imag());
}

}  // namespace

Basis::Basis(std::vector<BasisLabel> labels) : labels_(std::move(labels)) {
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    auto [it, inserted] = index_.emplace(labels_[i].name, i);
    if (!inserted) {
      throw ValidationError("duplicate basis label '" + labels_[i].name + "'");
    }
  }
}

Basis Basis::arms(const std::vector<std::string>& names) {
  std::vector<BasisLabel> labels;
  labels.reserve(names.size());
  for (const auto& n : names) labels.push_back(arm_label(n));
  return Basis(std::move(labels));
}

std::optional<std::size_t> Basis::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Basis::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw Error("unknown arm '" + std::string(name) + "'");
  return *i;
}

PureState::PureState(Basis b, std::vector<Amplitude> a)
    : basis(std::move(b)), amps(std::move(a)) {
  if (basis.size() != amps.size()) {
    throw ValidationError("state has " + std::to_string(amps.size()) +
                          " amplitudes over a basis of size " +
                          std::to_string(basis.size()));
  }
  for (const auto& amp : amps) {
    if (!is_finite(amp)) throw ValidationError("non-finite amplitude in state");
  }
}

PureState PureState::unit(const Basis& basis, std::string_view name) {
  std::vector<Amplitude> amps(basis.size(), Amplitude{0.0, 0.0});
  amps[basis.index_of(name)] = Amplitude{1.0, 0.0};
  return PureState(basis, std::move(amps));
}

PureState PureState::zero(const Basis& basis) {
  return PureState(basis, std::vector<Amplitude>(basis.size(), Amplitude{}));
}

const Amplitude& PureState::at(std::string_view name) const {
  return amps[basis.index_of(name)];
}

double PureState::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amps) n += std::norm(a);
  return n;
}

bool PureState::is_normalized(double tol) const {
  return std::abs(norm_squared() - 1.0) <= tol;
}

PureState PureState::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw Error("cannot normalize the zero state");
  std::vector<Amplitude> scaled(amps);
  for (auto& a : scaled) a /= n;
  return PureState(basis, std::move(scaled));
}

PureState PureState::remapped(const Basis& target) const {
  std::vector<Amplitude> out(target.size(), Amplitude{});
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (auto j = target.find(basis.label(i).name)) {
      out[*j] = amps[i];
    } else if (std::norm(amps[i]) > 0.0) {
      throw BasisMismatchError("label '" + basis.label(i).name +
                               "' with nonzero amplitude has no target slot");
    }
  }
  return PureState(target, std::move(out));
}

Amplitude inner_product(const PureState& a, const PureState& b) {
  if (!(a.basis == b.basis)) throw BasisMismatchError();
  Amplitude sum{};
  for (std::size_t i = 0; i < a.amps.size(); ++i) {
    sum += std::conj(a.amps[i]) * b.amps[i];
  }
  return sum;
}

Operator::Operator(Basis rows, Basis cols, std::vector<Entry> entries)
    : rows_(std::move(rows)), cols_(std::move(cols)) {
  for (const auto& e : entries) {
    if (e.row >= rows_.size() || e.col >= cols_.size()) {
      throw ValidationError("operator entry outside its bases");
    }
    if (!is_finite(e.value)) throw ValidationError("non-finite operator entry");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  // merge duplicates
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().row == e.row &&
        entries_.back().col == e.col) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
}

Operator Operator::identity(const Basis& basis) {
  std::vector<Entry> entries;
  entries.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    entries.push_back({i, i, Amplitude{1.0, 0.0}});
  }
  return Operator(basis, basis, std::move(entries));
}

Amplitude Operator::at(std::size_t row, std::size_t col) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), std::pair{row, col},
      [](const Entry& e, const std::pair<std::size_t, std::size_t>& k) {
        return e.row != k.first ? e.row < k.first : e.col < k.second;
      });
  if (it != entries_.end() && it->row == row && it->col == col) return it->value;
  return Amplitude{};
}

Operator Operator::adjoint() const {
  std::vector<Entry> entries;
  entries.reserve(entries_.size());
  for (const auto& e : entries_) {
    entries.push_back({e.col, e.row, std::conj(e.value)});
  }
  return Operator(cols_, rows_, std::move(entries));
}

bool Operator::is_unitary(double tol) const {
  if (rows_.size() != cols_.size()) return false;
  const std::size_t n = rows_.size();
  // dense n x n product is fine at these dimensions
  std::vector<Amplitude> product(n * n, Amplitude{});
  for (const auto& a : entries_) {
    for (const auto& b : entries_) {
      if (a.row == b.row) {
        product[a.col * n + b.col] += std::conj(a.value) * b.value;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Amplitude expected = i == j ? Amplitude{1.0, 0.0} : Amplitude{};
      if (std::abs(product[i * n + j] - expected) > tol) return false;
    }
  }
  return true;
}

PureState apply(const Operator& op, const PureState& s) {
  if (!(s.basis == op.cols())) throw BasisMismatchError();
  std::vector<Amplitude> out(op.rows().size(), Amplitude{});
  for (const auto& e : op.entries()) {
    out[e.row] += e.value * s.amps[e.col];
  }
  return PureState(op.rows(), std::move(out));
}

Operator projector(const std::vector<std::string>& arms, const Basis& basis) {
  std::vector<Operator::Entry> entries;
  entries.reserve(arms.size());
  for (const auto& name : arms) {
    const std::size_t i = basis.index_of(name);
    entries.push_back({i, i, Amplitude{1.0, 0.0}});
  }
  return Operator(basis, basis, std::move(entries));
}

double gaussian_overlap(double d1, double d2, double sigma) {
  if (!(sigma > 0.0)) throw Error("gaussian width sigma must be positive");
  const double d = d1 - d2;
  return std::exp(-d * d / (8.0 * sigma * sigma));
}

double gaussian_cross_moment(double d1, double d2, double sigma) {
  return 0.5 * (d1 + d2) * gaussian_overlap(d1, d2, sigma);
}

}  // namespace weaktrace
