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

#include "spintraj/liouville.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include <unsupported/Eigen/MatrixFunctions>

namespace spintraj {

namespace {

void append_number(std::string &out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g;", v);
  out += buf;
}

std::string fnv1a(const std::string &text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool all_finite(const cx_mat &m) {
  return m.allFinite();
}

}  // namespace

std::string to_string(const Channel &ch) {
  return ch.isotope + (ch.axis == Axis::x ? ":x" : ":y");
}

void validate(const ControlSet &controls) {
  if (!(controls.dt > 0.0) || !std::isfinite(controls.dt)) throw DomainError("control time step must be positive");
  if (controls.amplitudes.cols() < 1) throw DomainError("control set needs at least one time step");
  if (static_cast<std::size_t>(controls.amplitudes.rows()) != controls.channels.size())
    throw DomainError("amplitude matrix has " + std::to_string(controls.amplitudes.rows()) + " rows for " +
                      std::to_string(controls.channels.size()) + " channels");
  if (!std::isfinite(controls.power_hz)) throw DomainError("non-finite nominal power");
  if (!controls.amplitudes.allFinite()) throw DomainError("non-finite control amplitude");
}

std::string fingerprint(const SpinSystem &sys) {
  std::string s;
  for (const auto &spin : sys.spins) {
    s += spin.isotope + ';' + std::to_string(spin.multiplicity) + ';';
    append_number(s, spin.offset_hz);
  }
  s += '|';
  for (const auto &c : sys.couplings) {
    s += std::to_string(c.i) + ';' + std::to_string(c.j) + ';' + (c.model == CouplingModel::weak ? "w;" : "s;");
    append_number(s, c.j_hz);
  }
  s += '|';
  for (const auto &q : sys.quadrupolar) {
    s += std::to_string(q.spin) + ';';
    append_number(s, q.omega_q_hz);
    append_number(s, q.eta);
  }
  return fnv1a(s);
}

std::string fingerprint(const ControlSet &controls) {
  std::string s;
  append_number(s, controls.dt);
  append_number(s, controls.power_hz);
  for (const auto &ch : controls.channels) s += to_string(ch) + ';';
  for (Eigen::Index n = 0; n < controls.amplitudes.cols(); ++n)
    for (Eigen::Index k = 0; k < controls.amplitudes.rows(); ++k) append_number(s, controls.amplitudes(k, n));
  return fnv1a(s);
}

cx_mat drift_hamiltonian(const SpinSystem &sys) {
  validate(sys);
  const auto dim = static_cast<Eigen::Index>(sys.hilbert_dim());
  cx_mat h = cx_mat::Zero(dim, dim);
  for (std::size_t k = 0; k < sys.size(); ++k)
    if (sys.spins[k].offset_hz != 0.0) h += kTwoPi * sys.spins[k].offset_hz * spin_operator(sys, k, SpinAxis::z);

  for (const auto &c : sys.couplings) {
    cx_mat term = spin_operator(sys, c.i, SpinAxis::z) * spin_operator(sys, c.j, SpinAxis::z);
    if (c.model == CouplingModel::strong) {
      term += spin_operator(sys, c.i, SpinAxis::x) * spin_operator(sys, c.j, SpinAxis::x);
      term += spin_operator(sys, c.i, SpinAxis::y) * spin_operator(sys, c.j, SpinAxis::y);
    }
    h += kTwoPi * c.j_hz * term;
  }

  const auto mult = sys.multiplicities();
  for (const auto &q : sys.quadrupolar) {
    const int n = mult[q.spin];
    const cx_mat sx = single_spin_operator(n, SpinAxis::x);
    const cx_mat sy = single_spin_operator(n, SpinAxis::y);
    const cx_mat sz = single_spin_operator(n, SpinAxis::z);
    const cx_mat s2 = sx * sx + sy * sy + sz * sz;
    const cx_mat local = (3.0 * sz * sz - s2) + q.eta * (sx * sx - sy * sy);
    h += (kTwoPi * q.omega_q_hz / 3.0) * embed(mult, q.spin, local);
  }
  return h;
}

std::vector<cx_mat> control_operators(const SpinSystem &sys, const std::vector<Channel> &channels) {
  std::vector<cx_mat> out;
  out.reserve(channels.size());
  const auto dim = static_cast<Eigen::Index>(sys.hilbert_dim());
  for (const auto &ch : channels) {
    cx_mat c = cx_mat::Zero(dim, dim);
    bool found = false;
    for (std::size_t k = 0; k < sys.size(); ++k) {
      if (sys.spins[k].isotope != ch.isotope) continue;
      found = true;
      c += spin_operator(sys, k, ch.axis == Axis::x ? SpinAxis::x : SpinAxis::y);
    }
    if (!found) throw DomainError("control channel names isotope '" + ch.isotope + "' absent from the system");
    out.push_back(std::move(c));
  }
  return out;
}

cx_mat commutation_superoperator(const cx_mat &realization, const cx_mat &hamiltonian) {
  const auto n = hamiltonian.rows();
  if (hamiltonian.cols() != n || n * n != realization.rows())
    throw DomainError("Hamiltonian dimension does not match the basis");
  const auto d = realization.cols();
  cx_mat images(n * n, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    Eigen::Map<const cx_mat> op(realization.col(b).data(), n, n);
    const cx_mat comm = hamiltonian * op - op * hamiltonian;
    images.col(b) = Eigen::Map<const cx_vec>(comm.data(), n * n);
  }
  return realization.adjoint() * images;
}

cx_mat commutation_superoperator(const ProductBasis &basis, const cx_mat &hamiltonian) {
  if (static_cast<std::size_t>(hamiltonian.rows()) != basis.hilbert_dim())
    throw DomainError("Hamiltonian dimension does not match the basis");
  return commutation_superoperator(realization_matrix(basis), hamiltonian);
}

cx_mat step_propagator(const cx_mat &generator, double dt) {
  if (generator.rows() != generator.cols()) throw DomainError("generator must be square");
  if (!all_finite(generator) || !std::isfinite(dt)) throw NumericError("non-finite generator in step propagator");
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  cx_mat p = (-ci * dt * generator).exp();
  if (!all_finite(p)) throw NumericError("matrix exponential produced non-finite entries");
  return p;
}

Trajectory propagate(const SpinSystem &sys, const ControlSet &controls, const StateVector &rho0) {
  validate(controls);
  auto basis = std::make_shared<const ProductBasis>(product_basis(sys));
  if (static_cast<std::size_t>(rho0.size()) != basis->size())
    throw DomainError("initial state has dimension " + std::to_string(rho0.size()) + ", basis has " +
                      std::to_string(basis->size()));
  if (!rho0.allFinite()) throw NumericError("initial state has non-finite entries");

  const cx_mat q = realization_matrix(*basis);
  const cx_mat l0 = commutation_superoperator(q, drift_hamiltonian(sys));
  std::vector<cx_mat> lc;
  for (const auto &c : control_operators(sys, controls.channels)) lc.push_back(commutation_superoperator(q, c));

  Trajectory traj;
  traj.basis = basis;
  traj.system_hash = fingerprint(sys);
  traj.control_hash = fingerprint(controls);
  traj.times.reserve(controls.steps() + 1);
  traj.states.reserve(controls.steps() + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(rho0);

  // Phase-only pulses with quantized phases repeat step generators exactly.
  std::map<std::vector<double>, cx_mat> cache;
  const bool use_cache = basis->size() <= 64;
  const double scale = kTwoPi * controls.power_hz;

  for (std::size_t n = 0; n < controls.steps(); ++n) {
    const auto col = static_cast<Eigen::Index>(n);
    std::vector<double> key(controls.channels.size());
    for (std::size_t k = 0; k < key.size(); ++k) key[k] = controls.amplitudes(static_cast<Eigen::Index>(k), col);

    const cx_mat *prop = nullptr;
    cx_mat local;
    if (use_cache) {
      auto it = cache.find(key);
      if (it == cache.end()) {
        cx_mat gen = l0;
        for (std::size_t k = 0; k < lc.size(); ++k)
          if (key[k] != 0.0) gen += (scale * key[k]) * lc[k];
        it = cache.emplace(key, step_propagator(gen, controls.dt)).first;
      }
      prop = &it->second;
    } else {
      cx_mat gen = l0;
      for (std::size_t k = 0; k < lc.size(); ++k)
        if (key[k] != 0.0) gen += (scale * key[k]) * lc[k];
      local = step_propagator(gen, controls.dt);
      prop = &local;
    }
    traj.states.push_back(*prop * traj.states.back());
    traj.times.push_back(static_cast<double>(n + 1) * controls.dt);
  }
  return traj;
}

}  // namespace spintraj
