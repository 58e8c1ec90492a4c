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

#include "oracle.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

namespace oracle {

using namespace weaktrace;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXcd dense_of(const Operator& op) {
  MatrixXcd m = MatrixXcd::Zero(op.rows().size(), op.cols().size());
  for (const auto& e : op.entries()) {
    m(e.row, e.col) += e.value;
  }
  return m;
}

namespace {

VectorXcd vector_of(const PureState& s, const Basis& basis) {
  const PureState mapped = s.remapped(basis);
  VectorXcd v(mapped.dim());
  for (std::size_t i = 0; i < mapped.dim(); ++i) v(i) = mapped.amps[i];
  return v;
}

MatrixXcd product_before(const StagePlan& plan, std::size_t cut) {
  MatrixXcd u =
      MatrixXcd::Identity(plan.source_basis().size(),
                          plan.source_basis().size());
  for (std::size_t i = 0; i < cut; ++i) {
    u = (dense_of(plan.ops()[i]) * u).eval();
  }
  return u;
}

MatrixXcd product_after(const StagePlan& plan, std::size_t cut) {
  MatrixXcd u = MatrixXcd::Identity(plan.cut_basis(cut).size(),
                                    plan.cut_basis(cut).size());
  for (std::size_t i = cut; i < plan.ops().size(); ++i) {
    u = (dense_of(plan.ops()[i]) * u).eval();
  }
  return u;
}

// Probe schedule shared by the joint oracles: slot i of the instrumented
// network fires right after the cut where its arm first appears.
struct Schedule {
  struct Entry {
    std::size_t slot;
    std::size_t arm;  // arm index within the firing cut
  };
  std::vector<std::vector<Entry>> at_cut;
};

Schedule schedule_of(const InstrumentedNetwork& in, const StagePlan& plan) {
  Schedule s;
  s.at_cut.resize(plan.cut_count());
  for (std::size_t i = 0; i < in.couplings().size(); ++i) {
    const auto& arm = in.couplings()[i].arm;
    const std::size_t cut = plan.first_cut_of_arm(arm);
    s.at_cut[cut].push_back({i, plan.cut_basis(cut).index_of(arm)});
  }
  return s;
}

}  // namespace

std::map<std::string, std::complex<double>> plain_weak_values(
    const StagePlan& plan, const Preselection& pre, const Postselection& post,
    const std::string& stage) {
  const std::size_t cut = plan.cut_index(stage);
  const MatrixXcd before = product_before(plan, cut);
  const MatrixXcd after = product_after(plan, cut);
  const VectorXcd psi = vector_of(pre.state, plan.source_basis());
  const VectorXcd phi = vector_of(post.state, plan.detector_basis());

  const VectorXcd mid = before * psi;
  const VectorXcd back = after.adjoint() * phi;
  const std::complex<double> denom = back.dot(mid);

  std::map<std::string, std::complex<double>> values;
  const Basis& basis = plan.cut_basis(cut);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    VectorXcd projected = VectorXcd::Zero(mid.size());
    projected(i) = mid(i);
    values[basis.label(i).name] = back.dot(projected) / denom;
  }
  return values;
}

std::map<std::string, std::complex<double>> qubit_joint_weak_values(
    const InstrumentedNetwork& in, const Preselection& pre,
    const Postselection& post, const std::string& stage) {
  const StagePlan plan = compile(in.network());
  const std::size_t q = in.couplings().size();
  const std::size_t levels = std::size_t{1} << q;
  const Schedule sched = schedule_of(in, plan);

  const auto joint = [&](const MatrixXcd& arm_mat) {
    return Eigen::kroneckerProduct(arm_mat,
                                   MatrixXcd::Identity(levels, levels))
        .eval();
  };
  const auto coupling_matrix = [&](std::size_t cut,
                                   const Schedule::Entry& entry) {
    const double eps = std::get<QubitPointer>(
                           in.couplings()[entry.slot].pointer.kind)
                           .epsilon;
    const std::size_t arms = plan.cut_basis(cut).size();
    MatrixXcd m = MatrixXcd::Zero(arms * levels, arms * levels);
    for (std::size_t a = 0; a < arms; ++a) {
      for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t col = a * levels + l;
        if (a != entry.arm) {
          m(col, col) = 1.0;
          continue;
        }
        const bool bit = (l >> entry.slot) & 1;
        const std::size_t flipped = l ^ (std::size_t{1} << entry.slot);
        if (!bit) {
          m(col, col) += std::cos(eps);
          m(a * levels + flipped, col) += std::sin(eps);
        } else {
          m(col, col) += std::cos(eps);
          m(a * levels + flipped, col) -= std::sin(eps);
        }
      }
    }
    return m;
  };

  // One dense product from the source cut to `stage`, one from `stage` on.
  const std::size_t cut = plan.cut_index(stage);
  MatrixXcd before = MatrixXcd::Identity(
      plan.source_basis().size() * levels, plan.source_basis().size() * levels);
  for (const auto& entry : sched.at_cut[0]) {
    before = (coupling_matrix(0, entry) * before).eval();
  }
  for (std::size_t k = 0; k < cut; ++k) {
    before = (joint(dense_of(plan.ops()[k])) * before).eval();
    for (const auto& entry : sched.at_cut[k + 1]) {
      before = (coupling_matrix(k + 1, entry) * before).eval();
    }
  }
  MatrixXcd after = MatrixXcd::Identity(plan.cut_basis(cut).size() * levels,
                                        plan.cut_basis(cut).size() * levels);
  for (std::size_t k = cut; k < plan.ops().size(); ++k) {
    after = (joint(dense_of(plan.ops()[k])) * after).eval();
    for (const auto& entry : sched.at_cut[k + 1]) {
      after = (coupling_matrix(k + 1, entry) * after).eval();
    }
  }

  VectorXcd psi = VectorXcd::Zero(plan.source_basis().size() * levels);
  {
    const VectorXcd arm_psi = vector_of(pre.state, plan.source_basis());
    for (Eigen::Index a = 0; a < arm_psi.size(); ++a) {
      psi(a * levels + 0) = arm_psi(a);
    }
  }
  VectorXcd phi = VectorXcd::Zero(plan.detector_basis().size() * levels);
  {
    const VectorXcd arm_phi = vector_of(post.state, plan.detector_basis());
    for (Eigen::Index a = 0; a < arm_phi.size(); ++a) {
      phi(a * levels + 0) = arm_phi(a);
    }
  }

  const VectorXcd mid = before * psi;
  const VectorXcd back = after.adjoint() * phi;
  const std::complex<double> denom = back.dot(mid);

  std::map<std::string, std::complex<double>> values;
  const Basis& basis = plan.cut_basis(cut);
  for (std::size_t a = 0; a < basis.size(); ++a) {
    VectorXcd projected = VectorXcd::Zero(mid.size());
    for (std::size_t l = 0; l < levels; ++l) {
      projected(a * levels + l) = mid(a * levels + l);
    }
    values[basis.label(a).name] = back.dot(projected) / denom;
  }
  return values;
}

std::map<std::string, std::complex<double>> self_shift_weak_values(
    const InstrumentedNetwork& in, const Preselection& pre,
    const Postselection& post, const std::string& stage) {
  const StagePlan plan = compile(in.network());
  const std::size_t k = in.couplings().size();
  std::vector<double> deltas(k);
  double sigma = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = std::get<SelfShiftPointer>(in.couplings()[i].pointer.kind);
    deltas[i] = p.delta;
    sigma = p.sigma;
  }

  // center-coefficient tuples in {-1, 0, 1}^k, base-3 encoded
  std::size_t levels = 1;
  for (std::size_t i = 0; i < k; ++i) levels *= 3;
  const auto coeff = [&](std::size_t tuple, std::size_t slot) {
    for (std::size_t i = 0; i < slot; ++i) tuple /= 3;
    return static_cast<int>(tuple % 3) - 1;
  };
  const auto center = [&](std::size_t tuple) {
    double c = 0.0;
    for (std::size_t i = 0; i < k; ++i) c += coeff(tuple, i) * deltas[i];
    return c;
  };
  const std::size_t zero_tuple = [&] {
    std::size_t t = 0;
    std::size_t weight = 1;
    for (std::size_t i = 0; i < k; ++i) {
      t += weight;  // coefficient 0 encodes as digit 1
      weight *= 3;
    }
    return t;
  }();

  MatrixXcd gram_centers = MatrixXcd::Zero(levels, levels);
  for (std::size_t a = 0; a < levels; ++a) {
    for (std::size_t b = 0; b < levels; ++b) {
      const double d = center(a) - center(b);
      gram_centers(a, b) = std::exp(-d * d / (8.0 * sigma * sigma));
    }
  }

  const Schedule sched = schedule_of(in, plan);
  const auto joint = [&](const MatrixXcd& arm_mat) {
    return Eigen::kroneckerProduct(arm_mat,
                                   MatrixXcd::Identity(levels, levels))
        .eval();
  };
  // Translation of the shared mode on one arm: coefficient +1 on the slot
  // (cyclic in the encoding; the wrapped states are never populated).
  const auto shift_matrix = [&](std::size_t cut, const Schedule::Entry& e) {
    const std::size_t arms = plan.cut_basis(cut).size();
    std::size_t weight = 1;
    for (std::size_t i = 0; i < e.slot; ++i) weight *= 3;
    MatrixXcd m = MatrixXcd::Zero(arms * levels, arms * levels);
    for (std::size_t a = 0; a < arms; ++a) {
      for (std::size_t l = 0; l < levels; ++l) {
        if (a != e.arm) {
          m(a * levels + l, a * levels + l) = 1.0;
          continue;
        }
        const std::size_t digit = (l / weight) % 3;
        const std::size_t shifted = l + (digit == 2 ? -2 * weight : weight);
        m(a * levels + shifted, a * levels + l) = 1.0;
      }
    }
    return m;
  };

  const std::size_t cut = plan.cut_index(stage);
  MatrixXcd before = MatrixXcd::Identity(
      plan.source_basis().size() * levels, plan.source_basis().size() * levels);
  for (const auto& entry : sched.at_cut[0]) {
    before = (shift_matrix(0, entry) * before).eval();
  }
  for (std::size_t i = 0; i < cut; ++i) {
    before = (joint(dense_of(plan.ops()[i])) * before).eval();
    for (const auto& entry : sched.at_cut[i + 1]) {
      before = (shift_matrix(i + 1, entry) * before).eval();
    }
  }
  MatrixXcd after = MatrixXcd::Identity(plan.cut_basis(cut).size() * levels,
                                        plan.cut_basis(cut).size() * levels);
  for (std::size_t i = cut; i < plan.ops().size(); ++i) {
    after = (joint(dense_of(plan.ops()[i])) * after).eval();
    for (const auto& entry : sched.at_cut[i + 1]) {
      after = (shift_matrix(i + 1, entry) * after).eval();
    }
  }

  VectorXcd psi = VectorXcd::Zero(plan.source_basis().size() * levels);
  {
    const VectorXcd arm_psi = vector_of(pre.state, plan.source_basis());
    for (Eigen::Index a = 0; a < arm_psi.size(); ++a) {
      psi(a * levels + zero_tuple) = arm_psi(a);
    }
  }
  VectorXcd phi = VectorXcd::Zero(plan.detector_basis().size() * levels);
  {
    const VectorXcd arm_phi = vector_of(post.state, plan.detector_basis());
    for (Eigen::Index a = 0; a < arm_phi.size(); ++a) {
      phi(a * levels + zero_tuple) = arm_phi(a);
    }
  }

  const MatrixXcd gram_final = Eigen::kroneckerProduct(
      MatrixXcd::Identity(plan.detector_basis().size(),
                          plan.detector_basis().size()),
      gram_centers);

  const VectorXcd mid = before * psi;
  const VectorXcd bra = (phi.adjoint() * gram_final * after).adjoint();
  const std::complex<double> denom = bra.dot(mid);

  std::map<std::string, std::complex<double>> values;
  const Basis& basis = plan.cut_basis(cut);
  for (std::size_t a = 0; a < basis.size(); ++a) {
    VectorXcd projected = VectorXcd::Zero(mid.size());
    for (std::size_t l = 0; l < levels; ++l) {
      projected(a * levels + l) = mid(a * levels + l);
    }
    values[basis.label(a).name] = bra.dot(projected) / denom;
  }
  return values;
}

}  // namespace oracle
