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
#include <string>
#include <utility>
#include <vector>

#include "spintraj/core.hpp"
#include "spintraj/lbfgs.hpp"
#include "spintraj/liouville.hpp"
#include "spintraj/operator_algebra.hpp"

namespace spintraj {

enum class Parametrization { amplitudes, phases };
enum class GradientMode { exact, first_order };

// Offsets shift every spin of `isotope` (every spin when empty); power scales
// multiply all control amplitudes. Members are the Cartesian product.
struct Ensemble {
  std::string isotope;
  std::vector<double> offsets_hz{0.0};
  std::vector<double> power_scales{1.0};

  std::size_t size() const { return offsets_hz.size() * power_scales.size(); }
  std::pair<double, double> member(std::size_t index) const;  // (offset, scale)
};

struct ControlProblem {
  SpinSystem system;
  StateVector rho0;
  StateVector target;
  ControlSet controls;  // initial guess; also fixes dt, power and channels
  Parametrization parametrization = Parametrization::amplitudes;
  Ensemble ensemble;
  double power_penalty = 0.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;
  GradientMode gradient_mode = GradientMode::exact;
};

void validate(const ControlProblem &problem);

struct EnsembleFidelity {
  double mean = 0.0;
  std::vector<double> per_member;
};

enum class OptimizationStatus { converged, iteration_limit, line_search_failed };
std::string to_string(OptimizationStatus status);

struct OptimizationReport {
  double initial_fidelity = 0.0;
  double final_fidelity = 0.0;
  std::vector<double> member_fidelities;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> objective_history;  // one entry per accepted point
  std::vector<double> gradient_norms;
  ControlSet controls;
  OptimizationStatus status = OptimizationStatus::iteration_limit;
};

// Re<target|final>.
double fidelity(const StateVector &final_state, const StateVector &target);

EnsembleFidelity ensemble_fidelity(const ControlProblem &problem, const ControlSet &controls);

// d(mean ensemble fidelity)/d amplitudes, channels x steps. The power penalty is not included.
mat grape_gradient(const ControlProblem &problem, const ControlSet &controls);

// (x, y) channel index pairs per isotope, in order of first appearance.
std::vector<std::pair<std::size_t, std::size_t>> phase_pairs(const std::vector<Channel> &channels);

// df/dphi = A(-sin(phi) df/dcx + cos(phi) df/dcy) for every pair; pairs x steps.
mat phase_chain_rule(const mat &gradient_xy, const ControlSet &controls);

// Unit-amplitude controls with the given phases (pairs x steps).
ControlSet controls_from_phases(const ControlSet &shape, const mat &phases);
mat phases_of(const ControlSet &controls);

// Uniform amplitudes in [-0.1, 0.1] or phases in [0, 2pi), seeded.
ControlSet random_guess(const ControlSet &shape, Parametrization parametrization, std::uint64_t seed);

OptimizationReport optimize(const ControlProblem &problem);

}  // namespace spintraj
