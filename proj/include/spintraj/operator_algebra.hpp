/* Copyright 2026 The Spintraj Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spintraj/core.hpp"

namespace spintraj {

struct Spin {
  std::string isotope;
  int multiplicity = 2;    // 2s+1
  double offset_hz = 0.0;  // rotating-frame Zeeman offset
  std::string name;        // optional, used by state expressions

  bool operator==(const Spin &) const = default;
};

enum class CouplingModel { weak, strong };

struct Coupling {
  std::size_t i = 0;
  std::size_t j = 0;
  double j_hz = 0.0;
  CouplingModel model = CouplingModel::weak;

  bool operator==(const Coupling &) const = default;
};

struct Quadrupolar {
  std::size_t spin = 0;
  double omega_q_hz = 0.0;
  double eta = 0.0;

  bool operator==(const Quadrupolar &) const = default;
};

struct SpinSystem {
  std::vector<Spin> spins;
  std::vector<Coupling> couplings;
  std::vector<Quadrupolar> quadrupolar;

  std::size_t size() const { return spins.size(); }
  std::size_t hilbert_dim() const;
  std::size_t liouville_dim() const;
  std::vector<int> multiplicities() const;

  // Resolves a spin reference: a decimal index or a spin name.
  std::optional<std::size_t> find(const std::string &ref) const;

  bool operator==(const SpinSystem &) const = default;
};

// Throws DomainError naming the first violated invariant.
void validate(const SpinSystem &sys);

// Weak (zz) for heteronuclear pairs, strong (full scalar product) for same isotope.
CouplingModel default_coupling_model(const SpinSystem &sys, std::size_t i, std::size_t j);

// One (l, m) pair per spin of a product state.
struct LocalState {
  int l = 0;
  int m = 0;
  auto operator<=>(const LocalState &) const = default;
};

struct BasisLabel {
  std::vector<LocalState> components;
  auto operator<=>(const BasisLabel &) const = default;
};

// Number of non-unit factors.
int correlation_order(const BasisLabel &label);
// Total projection quantum number.
int coherence_order(const BasisLabel &label);
// "(1,0)(0,0)(1,1)"
std::string to_string(const BasisLabel &label);

/// Normalized irreducible spherical tensor product basis of Liouville space.
///
/// Ordering: lexicographic over per-spin (l, m), m ascending within l, with
/// spin 0 the slowest-varying factor. The local index of (l, m) on one spin is
/// l*l + l + m, and the global index is the mixed-radix number of local indices
/// with radix n_k^2. Each basis operator is the Kronecker product of per-spin
/// tensors, spin 0 leftmost, and has unit Frobenius norm.
class ProductBasis {
 public:
  explicit ProductBasis(std::vector<int> multiplicities);

  std::size_t size() const { return labels_.size(); }
  std::size_t spins() const { return multiplicities_.size(); }
  std::size_t hilbert_dim() const { return hilbert_dim_; }
  const std::vector<int> &multiplicities() const { return multiplicities_; }
  const std::vector<BasisLabel> &labels() const { return labels_; }
  const BasisLabel &label(std::size_t index) const;
  std::size_t index(const BasisLabel &label) const;
  // Largest attainable coherence order, sum of 2s_k.
  int max_coherence() const;

  bool operator==(const ProductBasis &other) const { return multiplicities_ == other.multiplicities_; }

 private:
  std::vector<int> multiplicities_;
  std::vector<BasisLabel> labels_;
  std::size_t hilbert_dim_ = 1;
};

ProductBasis product_basis(const SpinSystem &sys);

/// Unit-Frobenius-norm T_{l,m} for one spin of the given multiplicity.
///
/// Hilbert states are ordered by descending projection (m_s = s, s-1, ..., -s).
/// T_{l,l} = (-1)^l (S+)^l / ||(S+)^l|| (Condon-Shortley), lower components by
/// T_{l,m-1} = [S-, T_{l,m}] / sqrt(l(l+1) - m(m-1)).
cx_mat ist_operator(int multiplicity, int l, int m);

enum class SpinAxis { x, y, z, plus, minus };

cx_mat single_spin_operator(int multiplicity, SpinAxis which);

// Operator acting on one spin, embedded with identities in the other slots.
cx_mat spin_operator(const SpinSystem &sys, std::size_t spin, SpinAxis which);

// Embeds a single-spin matrix into the full Hilbert space.
cx_mat embed(const std::vector<int> &multiplicities, std::size_t spin, const cx_mat &op);

// Hilbert-space matrix of basis state `index`.
cx_mat basis_operator(const ProductBasis &basis, std::size_t index);

// Columns are column-major vec() of every basis operator; unitary.
cx_mat realization_matrix(const ProductBasis &basis);

// Coefficients <B_a|X> of a Hilbert-space operator.
StateVector to_liouville(const ProductBasis &basis, const cx_mat &op);
StateVector to_liouville(const cx_mat &realization, const cx_mat &op);
// sum_a c_a B_a
cx_mat to_hilbert(const ProductBasis &basis, const StateVector &coefficients);
cx_mat to_hilbert(const cx_mat &realization, std::size_t hilbert_dim, const StateVector &coefficients);

}  // namespace spintraj
