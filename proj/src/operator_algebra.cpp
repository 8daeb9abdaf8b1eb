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

#include "spintraj/operator_algebra.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include <unsupported/Eigen/KroneckerProduct>

namespace spintraj {

namespace {

std::size_t local_count(int multiplicity) {
  return static_cast<std::size_t>(multiplicity) * static_cast<std::size_t>(multiplicity);
}

std::size_t local_index(const LocalState &s) {
  return static_cast<std::size_t>(s.l * s.l + s.l + s.m);
}

LocalState local_state(std::size_t local) {
  int l = static_cast<int>(std::sqrt(static_cast<double>(local)));
  while (static_cast<std::size_t>(l * l) > local) --l;
  while (static_cast<std::size_t>((l + 1) * (l + 1)) <= local) ++l;
  return {l, static_cast<int>(local) - l * l - l};
}

void check_multiplicity(int multiplicity) {
  if (multiplicity < 2) throw DomainError("spin multiplicity must be at least 2, got " + std::to_string(multiplicity));
}

}  // namespace

std::size_t SpinSystem::hilbert_dim() const {
  std::size_t dim = 1;
  for (const auto &s : spins) dim *= static_cast<std::size_t>(s.multiplicity);
  return dim;
}

std::size_t SpinSystem::liouville_dim() const {
  const auto n = hilbert_dim();
  return n * n;
}

std::vector<int> SpinSystem::multiplicities() const {
  std::vector<int> out;
  out.reserve(spins.size());
  for (const auto &s : spins) out.push_back(s.multiplicity);
  return out;
}

std::optional<std::size_t> SpinSystem::find(const std::string &ref) const {
  for (std::size_t k = 0; k < spins.size(); ++k)
    if (!spins[k].name.empty() && spins[k].name == ref) return k;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
  if (ec == std::errc() && ptr == ref.data() + ref.size() && idx < spins.size()) return idx;
  return std::nullopt;
}

void validate(const SpinSystem &sys) {
  if (sys.spins.empty()) throw DomainError("spin system has no spins");
  std::set<std::string> names;
  for (std::size_t k = 0; k < sys.spins.size(); ++k) {
    const auto &s = sys.spins[k];
    if (s.multiplicity < 2)
      throw DomainError("spin " + std::to_string(k) + ": multiplicity must be at least 2");
    if (s.isotope.empty()) throw DomainError("spin " + std::to_string(k) + ": empty isotope label");
    if (!std::isfinite(s.offset_hz)) throw DomainError("spin " + std::to_string(k) + ": non-finite offset");
    if (!s.name.empty() && !names.insert(s.name).second)
      throw DomainError("duplicate spin name '" + s.name + "'");
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto &c : sys.couplings) {
    if (c.i >= c.j || c.j >= sys.spins.size())
      throw DomainError("coupling (" + std::to_string(c.i) + ", " + std::to_string(c.j) +
                        "): indices must satisfy i < j < number of spins");
    if (!pairs.emplace(c.i, c.j).second)
      throw DomainError("duplicate coupling between spins " + std::to_string(c.i) + " and " + std::to_string(c.j));
    if (!std::isfinite(c.j_hz)) throw DomainError("coupling has non-finite J");
  }
  std::set<std::size_t> quad;
  for (const auto &q : sys.quadrupolar) {
    if (q.spin >= sys.spins.size()) throw DomainError("quadrupolar entry on invalid spin " + std::to_string(q.spin));
    if (sys.spins[q.spin].multiplicity < 3)
      throw DomainError("quadrupolar entry on spin " + std::to_string(q.spin) + " with multiplicity < 3");
    if (!(q.eta >= 0.0 && q.eta <= 1.0)) throw DomainError("quadrupolar eta must lie in [0, 1]");
    if (!std::isfinite(q.omega_q_hz)) throw DomainError("quadrupolar omega_q is non-finite");
    if (!quad.insert(q.spin).second)
      throw DomainError("duplicate quadrupolar entry on spin " + std::to_string(q.spin));
  }
}

CouplingModel default_coupling_model(const SpinSystem &sys, std::size_t i, std::size_t j) {
  return sys.spins.at(i).isotope == sys.spins.at(j).isotope ? CouplingModel::strong : CouplingModel::weak;
}

int correlation_order(const BasisLabel &label) {
  int k = 0;
  for (const auto &c : label.components)
    if (c.l > 0) ++k;
  return k;
}

int coherence_order(const BasisLabel &label) {
  int m = 0;
  for (const auto &c : label.components) m += c.m;
  return m;
}

std::string to_string(const BasisLabel &label) {
  std::ostringstream os;
  for (const auto &c : label.components) os << '(' << c.l << ',' << c.m << ')';
  return os.str();
}

ProductBasis::ProductBasis(std::vector<int> multiplicities) : multiplicities_(std::move(multiplicities)) {
  if (multiplicities_.empty()) throw DomainError("product basis needs at least one spin");
  std::size_t dim = 1;
  for (int n : multiplicities_) {
    check_multiplicity(n);
    dim *= local_count(n);
    hilbert_dim_ *= static_cast<std::size_t>(n);
  }
  labels_.resize(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    auto &comps = labels_[idx].components;
    comps.resize(multiplicities_.size());
    std::size_t rest = idx;
    for (std::size_t k = multiplicities_.size(); k-- > 0;) {
      const auto radix = local_count(multiplicities_[k]);
      comps[k] = local_state(rest % radix);
      rest /= radix;
    }
  }
}

const BasisLabel &ProductBasis::label(std::size_t index) const {
  if (index >= labels_.size()) throw DomainError("basis index out of range");
  return labels_[index];
}

std::size_t ProductBasis::index(const BasisLabel &label) const {
  if (label.components.size() != multiplicities_.size()) throw DomainError("label has wrong number of spins");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < multiplicities_.size(); ++k) {
    const auto &c = label.components[k];
    if (c.l < 0 || c.l > multiplicities_[k] - 1 || std::abs(c.m) > c.l)
      throw DomainError("label component (" + std::to_string(c.l) + "," + std::to_string(c.m) +
                        ") not admissible on spin " + std::to_string(k));
    idx = idx * local_count(multiplicities_[k]) + local_index(c);
  }
  return idx;
}

int ProductBasis::max_coherence() const {
  int m = 0;
  for (int n : multiplicities_) m += n - 1;
  return m;
}

ProductBasis product_basis(const SpinSystem &sys) {
  validate(sys);
  return ProductBasis(sys.multiplicities());
}

cx_mat single_spin_operator(int multiplicity, SpinAxis which) {
  check_multiplicity(multiplicity);
  const double s = (multiplicity - 1) / 2.0;
  cx_mat plus = cx_mat::Zero(multiplicity, multiplicity);
  cx_mat z = cx_mat::Zero(multiplicity, multiplicity);
  for (int i = 0; i < multiplicity; ++i) {
    const double m = s - i;
    z(i, i) = m;
    if (i > 0) plus(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  switch (which) {
    case SpinAxis::z: return z;
    case SpinAxis::plus: return plus;
    case SpinAxis::minus: return plus.adjoint();
    case SpinAxis::x: return (plus + plus.adjoint()) / 2.0;
    case SpinAxis::y: return (plus - plus.adjoint()) / (2.0 * ci);
  }
  throw DomainError("unknown spin operator");
}

cx_mat ist_operator(int multiplicity, int l, int m) {
  check_multiplicity(multiplicity);
  if (l < 0 || l > multiplicity - 1) throw DomainError("tensor rank out of range: " + std::to_string(l));
  if (std::abs(m) > l) throw DomainError("tensor projection out of range: " + std::to_string(m));
  const cx_mat plus = single_spin_operator(multiplicity, SpinAxis::plus);
  const cx_mat minus = plus.adjoint();

  cx_mat t = cx_mat::Identity(multiplicity, multiplicity);
  for (int p = 0; p < l; ++p) t = t * plus;
  t /= t.norm();
  if (l % 2 == 1) t = -t;

  for (int q = l; q > m; --q) {
    const cx_mat comm = minus * t - t * minus;
    t = comm / std::sqrt(static_cast<double>(l * (l + 1) - q * (q - 1)));
  }
  return t;
}

cx_mat embed(const std::vector<int> &multiplicities, std::size_t spin, const cx_mat &op) {
  if (spin >= multiplicities.size()) throw DomainError("spin index out of range: " + std::to_string(spin));
  if (op.rows() != multiplicities[spin] || op.cols() != multiplicities[spin])
    throw DomainError("single-spin operator has wrong dimension");
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < spin; ++k) left *= multiplicities[k];
  for (std::size_t k = spin + 1; k < multiplicities.size(); ++k) right *= multiplicities[k];
  const cx_mat lid = cx_mat::Identity(left, left);
  const cx_mat rid = cx_mat::Identity(right, right);
  cx_mat tmp = Eigen::kroneckerProduct(lid, op).eval();
  return Eigen::kroneckerProduct(tmp, rid).eval();
}

cx_mat spin_operator(const SpinSystem &sys, std::size_t spin, SpinAxis which) {
  if (spin >= sys.size()) throw DomainError("spin index out of range: " + std::to_string(spin));
  return embed(sys.multiplicities(), spin, single_spin_operator(sys.spins[spin].multiplicity, which));
}

cx_mat basis_operator(const ProductBasis &basis, std::size_t index) {
  const auto &label = basis.label(index);
  const auto &mult = basis.multiplicities();
  cx_mat out = ist_operator(mult[0], label.components[0].l, label.components[0].m);
  for (std::size_t k = 1; k < mult.size(); ++k) {
    const cx_mat t = ist_operator(mult[k], label.components[k].l, label.components[k].m);
    out = Eigen::kroneckerProduct(out, t).eval();
  }
  return out;
}

cx_mat realization_matrix(const ProductBasis &basis) {
  const auto n = static_cast<Eigen::Index>(basis.hilbert_dim());
  cx_mat q(n * n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const cx_mat op = basis_operator(basis, b);
    q.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const cx_vec>(op.data(), n * n);
  }
  return q;
}

StateVector to_liouville(const cx_mat &realization, const cx_mat &op) {
  if (op.size() != realization.rows()) throw DomainError("operator dimension does not match basis");
  return realization.adjoint() * Eigen::Map<const cx_vec>(op.data(), op.size());
}

StateVector to_liouville(const ProductBasis &basis, const cx_mat &op) {
  return to_liouville(realization_matrix(basis), op);
}

cx_mat to_hilbert(const cx_mat &realization, std::size_t hilbert_dim, const StateVector &coefficients) {
  if (coefficients.size() != realization.cols()) throw DomainError("state dimension does not match basis");
  const auto n = static_cast<Eigen::Index>(hilbert_dim);
  const cx_vec v = realization * coefficients;
  return Eigen::Map<const cx_mat>(v.data(), n, n);
}

cx_mat to_hilbert(const ProductBasis &basis, const StateVector &coefficients) {
  return to_hilbert(realization_matrix(basis), basis.hilbert_dim(), coefficients);
}

}  // namespace spintraj
