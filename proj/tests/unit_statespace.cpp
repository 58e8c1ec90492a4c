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
#include <random>

#include "doctest.h"
#include "weaktrace/statespace.hpp"

using namespace weaktrace;

namespace {

// Deterministic random states for the property checks.
std::mt19937 rng(20260809);

PureState random_state(const Basis& basis, bool normalize = true) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Amplitude> amps;
  amps.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    amps.emplace_back(uni(rng), uni(rng));
  }
  PureState s(basis, std::move(amps));
  return normalize ? s.normalized() : s;
}

// Simpson quadrature of the overlap of two width-sigma Gaussians. Serves as
// the independent check of the closed form used by the library.
double overlap_by_quadrature(double d1, double d2, double sigma) {
  const double lo = std::min(d1, d2) - 14.0 * sigma;
  const double hi = std::max(d1, d2) + 14.0 * sigma;
  const int n = 4000;  // even
  const double h = (hi - lo) / n;
  const auto psi = [&](double x, double c) {
    return std::pow(2.0 * M_PI * sigma * sigma, -0.25) *
           std::exp(-(x - c) * (x - c) / (4.0 * sigma * sigma));
  };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * psi(x, d1) * psi(x, d2);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST_SUITE("statespace") {

TEST_CASE("inner product of a normalized state with itself is one") {
  const Basis basis = Basis::arms({"A", "B", "C"});
  for (int i = 0; i < 20; ++i) {
    const PureState v = random_state(basis);
    CHECK(std::abs(inner_product(v, v) - Amplitude{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("distinct basis states are orthogonal") {
  const Basis basis = Basis::arms({"A", "C"});
  const PureState a = PureState::unit(basis, "A");
  const PureState c = PureState::unit(basis, "C");
  CHECK(inner_product(a, c) == Amplitude{0.0, 0.0});
}

TEST_CASE("inner product conjugate symmetry") {
  const Basis basis = Basis::arms({"A", "B", "C", "D"});
  for (int i = 0; i < 50; ++i) {
    const PureState a = random_state(basis, false);
    const PureState b = random_state(basis, false);
    const Amplitude ab = inner_product(a, b);
    const Amplitude ba = inner_product(b, a);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-15);
  }
}

TEST_CASE("inner product rejects mismatched bases") {
  const PureState a = PureState::unit(Basis::arms({"A", "B"}), "A");
  const PureState b = PureState::unit(Basis::arms({"B", "A"}), "A");
  CHECK_THROWS_AS((void)inner_product(a, b), BasisMismatchError);
}

TEST_CASE("identity application returns the state") {
  const Basis basis = Basis::arms({"A", "B", "C"});
  const PureState v = random_state(basis);
  const PureState w = apply(Operator::identity(basis), v);
  for (std::size_t i = 0; i < v.dim(); ++i) {
    CHECK(w.amps[i] == v.amps[i]);
  }
}

TEST_CASE("50/50 splitter column under the fixed convention") {
  // out1 = t in1 + i r in2, out2 = i r in1 + t in2 with t = r = 1/sqrt(2)
  const double s = 1.0 / std::sqrt(2.0);
  const Basis basis = Basis::arms({"in1", "in2"});
  const Operator bs(basis, basis,
                    {{0, 0, {s, 0}}, {0, 1, {0, s}}, {1, 0, {0, s}},
                     {1, 1, {s, 0}}});
  const PureState out = apply(bs, PureState::unit(basis, "in1"));
  CHECK(out.amps[0].real() == doctest::Approx(s).epsilon(1e-15));
  CHECK(out.amps[0].imag() == 0.0);
  CHECK(out.amps[1].real() == 0.0);
  CHECK(out.amps[1].imag() == doctest::Approx(s).epsilon(1e-15));
  CHECK(bs.is_unitary());
}

TEST_CASE("unitary application preserves the norm") {
  const double t = 0.6;
  const double r = 0.8;
  const Basis basis = Basis::arms({"a", "b"});
  const Operator bs(basis, basis,
                    {{0, 0, {t, 0}}, {0, 1, {0, r}}, {1, 0, {0, r}},
                     {1, 1, {t, 0}}});
  REQUIRE(bs.is_unitary());
  for (int i = 0; i < 30; ++i) {
    const PureState v = random_state(basis, false);
    CHECK(apply(bs, v).norm_squared() ==
          doctest::Approx(v.norm_squared()).epsilon(1e-12));
  }
}

TEST_CASE("projector on orthogonal support annihilates the state") {
  const Basis basis = Basis::arms({"A", "C"});
  const PureState on_a = PureState::unit(basis, "A");
  const PureState projected = apply(projector({"C"}, basis), on_a);
  CHECK(projected.norm_squared() == 0.0);
}

TEST_CASE("projector idempotence and completeness") {
  const Basis basis = Basis::arms({"A", "B", "C", "D"});
  const Operator p = projector({"B", "C"}, basis);
  const Operator complement = projector({"A", "D"}, basis);
  for (int i = 0; i < 20; ++i) {
    const PureState v = random_state(basis, false);
    const PureState pv = apply(p, v);
    const PureState ppv = apply(p, pv);
    for (std::size_t k = 0; k < v.dim(); ++k) {
      CHECK(std::abs(ppv.amps[k] - pv.amps[k]) < 1e-15);
      const Amplitude total = pv.amps[k] + apply(complement, v).amps[k];
      CHECK(std::abs(total - v.amps[k]) < 1e-15);
    }
  }
  CHECK_THROWS((void)projector({"Z"}, basis));
}

TEST_CASE("projector over all arms is the identity") {
  const Basis basis = Basis::arms({"A", "B", "C"});
  const Operator p = projector({"A", "B", "C"}, basis);
  CHECK(p.is_unitary());
}

TEST_CASE("gaussian overlap closed form") {
  const double sigma = 0.7;
  CHECK(gaussian_overlap(0.3, 0.3, sigma) == 1.0);
  // frozen values of exp(-1/8) and exp(-12.5)
  CHECK(gaussian_overlap(0.0, sigma, sigma) ==
        doctest::Approx(0.88249690258459546).epsilon(1e-14));
  CHECK(gaussian_overlap(0.0, 10.0 * sigma, sigma) ==
        doctest::Approx(3.7266531720786709e-06).epsilon(1e-12));
  CHECK_THROWS((void)gaussian_overlap(0.0, 1.0, 0.0));
  CHECK_THROWS((void)gaussian_overlap(0.0, 1.0, -1.0));
}

TEST_CASE("gaussian overlap against quadrature") {
  for (const double sigma : {0.5, 1.0, 2.0}) {
    for (const double d : {0.0, 0.2, 1.0, 3.0}) {
      CHECK(gaussian_overlap(0.0, d, sigma) ==
            doctest::Approx(overlap_by_quadrature(0.0, d, sigma))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("gaussian cross moment against quadrature") {
  const double sigma = 0.8;
  for (const double a : {0.0, 0.5}) {
    for (const double b : {0.0, 0.3, 1.5}) {
      const double lo = -16.0 * sigma;
      const double hi = 16.0 * sigma;
      const int n = 8000;
      const double h = (hi - lo) / n;
      const auto psi = [&](double x, double c) {
        return std::pow(2.0 * M_PI * sigma * sigma, -0.25) *
               std::exp(-(x - c) * (x - c) / (4.0 * sigma * sigma));
      };
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * psi(x, a) * x * psi(x, b);
      }
      sum *= h / 3.0;
      CHECK(gaussian_cross_moment(a, b, sigma) ==
            doctest::Approx(sum).epsilon(1e-9));
    }
  }
}

TEST_CASE("gaussian overlap symmetry and monotone decay") {
  std::uniform_real_distribution<double> uni(0.1, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double sigma = uni(rng);
    const double d1 = uni(rng);
    const double d2 = uni(rng);
    CHECK(gaussian_overlap(d1, d2, sigma) == gaussian_overlap(d2, d1, sigma));
  }
  const double sigma = 1.0;
  double previous = gaussian_overlap(0.0, 0.0, sigma);
  for (double d = 0.25; d < 5.0; d += 0.25) {
    const double current = gaussian_overlap(0.0, d, sigma);
    CHECK(current < previous);
    previous = current;
  }
}

TEST_CASE("states reject non-finite amplitudes") {
  const Basis basis = Basis::arms({"A"});
  CHECK_THROWS((void)PureState(
      basis, {Amplitude{std::numeric_limits<double>::quiet_NaN(), 0.0}}));
}

TEST_CASE("operator adjoint flips entries and conjugates") {
  const Basis rows = Basis::arms({"x", "y"});
  const Operator op(rows, rows, {{0, 1, {0.25, -0.5}}});
  const Operator adj = op.adjoint();
  CHECK(adj.at(1, 0) == Amplitude{0.25, 0.5});
  CHECK(adj.at(0, 1) == Amplitude{0.0, 0.0});
}

}  // TEST_SUITE
