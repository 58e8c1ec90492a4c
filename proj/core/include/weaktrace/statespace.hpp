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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weaktrace/errors.hpp"

namespace weaktrace {

using Amplitude = std::complex<double>;

/// Default tolerance for all approximate equality checks in this module.
inline constexpr double kDefaultTol = 1e-12;

enum class LabelKind { Arm, PointerLevel };

/// A named basis direction: an interferometer arm or a pointer level.
struct BasisLabel {
  LabelKind kind = LabelKind::Arm;
  std::string name;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

inline BasisLabel arm_label(std::string name) {
  return BasisLabel{LabelKind::Arm, std::move(name)};
}

inline BasisLabel pointer_label(std::string name) {
  return BasisLabel{LabelKind::PointerLevel, std::move(name)};
}

/// Ordered list of distinct labels with O(1) lookup by name.
class Basis {
 public:
  Basis() = default;
  explicit Basis(std::vector<BasisLabel> labels);

  /// Convenience: a basis of arm labels in the given order.
  static Basis arms(const std::vector<std::string>& names);

  std::size_t size() const { return labels_.size(); }
  const BasisLabel& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<BasisLabel>& labels() const { return labels_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  friend bool operator==(const Basis& a, const Basis& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<BasisLabel> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Complex amplitude vector over a labeled basis. Immutable by convention:
/// operations return new states.
struct PureState {
  Basis basis;
  std::vector<Amplitude> amps;

  PureState() = default;
  PureState(Basis b, std::vector<Amplitude> a);

  /// Basis state with unit amplitude on `name`.
  static PureState unit(const Basis& basis, std::string_view name);
  /// All-zero state.
  static PureState zero(const Basis& basis);

  std::size_t dim() const { return amps.size(); }
  const Amplitude& at(std::string_view name) const;
  double norm_squared() const;
  bool is_normalized(double tol = kDefaultTol) const;
  PureState normalized() const;
  /// Re-express over `target`: amplitudes move by label, labels absent from
  /// this state fill with zero. Throws if a nonzero amplitude has no home.
  PureState remapped(const Basis& target) const;
};

/// <a|b> = sum_i conj(a_i) b_i. Bases must be identical and ordered alike.
Amplitude inner_product(const PureState& a, const PureState& b);

/// Sparse complex operator mapping states over `cols` to states over `rows`.
/// Square whenever rows == cols; stage maps across a Block are rectangular.
class Operator {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    Amplitude value;
  };

  Operator() = default;
  Operator(Basis rows, Basis cols, std::vector<Entry> entries);

  static Operator identity(const Basis& basis);

  const Basis& rows() const { return rows_; }
  const Basis& cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  const std::vector<Entry>& entries() const { return entries_; }

  Amplitude at(std::size_t row, std::size_t col) const;
  Operator adjoint() const;
  /// U^dagger U == I entrywise within tol for a dimensionally square
  /// operator; the row basis may rename the column basis.
  bool is_unitary(double tol = kDefaultTol) const;

 private:
  Basis rows_;
  Basis cols_;
  std::vector<Entry> entries_;  // sorted by (row, col), coincident entries merged
};

/// Matrix-vector product. Throws BasisMismatchError unless s lives on cols().
PureState apply(const Operator& op, const PureState& s);

/// Diagonal 0/1 operator keeping the named arms. Throws on unknown labels.
Operator projector(const std::vector<std::string>& arms, const Basis& basis);

/// Inner product of two normalized Gaussians of width sigma (<x^2> = sigma^2)
/// centered at d1 and d2: exp(-(d1-d2)^2 / (8 sigma^2)). Requires sigma > 0.
double gaussian_overlap(double d1, double d2, double sigma);

/// First moment <G_d1| x |G_d2> = ((d1+d2)/2) * gaussian_overlap(d1,d2,sigma),
/// used for pointer means over non-orthogonal Gaussian registers.
double gaussian_cross_moment(double d1, double d2, double sigma);

}  // namespace weaktrace
