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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spintraj/core.hpp"
#include "spintraj/operator_algebra.hpp"

namespace spintraj {

enum class Axis { x, y };

struct Channel {
  std::string isotope;
  Axis axis = Axis::x;

  bool operator==(const Channel &) const = default;
};

std::string to_string(const Channel &ch);  // "1H:x"

// Piecewise-constant controls. amplitudes(k, n) multiplies power_hz on channel k
// during step n; the nutation rate is 2*pi*power_hz*amplitude rad/s.
struct ControlSet {
  double dt = 0.0;
  double power_hz = 0.0;
  std::vector<Channel> channels;
  mat amplitudes;  // channels x steps

  std::size_t steps() const { return static_cast<std::size_t>(amplitudes.cols()); }
  double duration() const { return dt * static_cast<double>(steps()); }
};

void validate(const ControlSet &controls);

struct Trajectory {
  std::shared_ptr<const ProductBasis> basis;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::string system_hash;
  std::string control_hash;

  std::size_t points() const { return states.size(); }
};

// FNV-1a over a canonical text rendering, as 16 hex digits.
std::string fingerprint(const SpinSystem &sys);
std::string fingerprint(const ControlSet &controls);

/// Rotating-frame drift Hamiltonian in rad/s:
///   sum_k 2pi nu_k Sz_k
/// + sum_{i<j} 2pi J_ij (Sz_i Sz_j | S_i.S_j)
/// + sum_q (2pi wq/3) [(3Sz^2 - S^2) + eta (Sx^2 - Sy^2)].
cx_mat drift_hamiltonian(const SpinSystem &sys);

// One Hilbert-space operator per channel: sum of Sx (or Sy) over spins of that isotope.
std::vector<cx_mat> control_operators(const SpinSystem &sys, const std::vector<Channel> &channels);

// Matrix of rho -> [H, rho] in the product basis.
cx_mat commutation_superoperator(const ProductBasis &basis, const cx_mat &hamiltonian);
cx_mat commutation_superoperator(const cx_mat &realization, const cx_mat &hamiltonian);

// exp(-i L dt) by scaling and squaring with Pade approximants.
cx_mat step_propagator(const cx_mat &generator, double dt);

// Liouville-space propagation; returns steps()+1 states starting from rho0.
Trajectory propagate(const SpinSystem &sys, const ControlSet &controls, const StateVector &rho0);

}  // namespace spintraj
