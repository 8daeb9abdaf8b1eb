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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spintraj/analysis.hpp"
#include "spintraj/grape.hpp"
#include "spintraj/liouville.hpp"
#include "spintraj/operator_algebra.hpp"

namespace spintraj::io {

// ---------------------------------------------------------------------------
// Spin system documents (YAML):
//
//   spins:
//     - {name: Ha, isotope: 1H, offset_hz: 0}
//     - {name: N, isotope: 14N, multiplicity: 3}
//   couplings:
//     - {between: [Ha, 1], j_hz: 140, model: weak}
//   quadrupolar:
//     - {spin: N, omega_q_hz: 10000, eta: 0.5}
//
// `multiplicity` defaults from the isotope for common nuclei; `model`
// defaults to strong for same-isotope pairs and weak otherwise.
// ---------------------------------------------------------------------------
SpinSystem parse_system(std::string_view text);
std::string serialize_system(const SpinSystem &sys);

// Multiplicity of a known isotope label, if any.
std::optional<int> isotope_multiplicity(const std::string &isotope);

// Waveforms: "# dt=", "# power_hz=", "# channels=1H:x,1H:y" headers followed by
// one whitespace-separated row of amplitude multipliers per time step.
ControlSet read_waveform(std::string_view text);
std::string write_waveform(const ControlSet &controls);

// Trajectories: header with multiplicities and the basis label table, then one
// row per time point: t re_0 im_0 re_1 im_1 ... Reading checks the label table
// against the canonical ordering (and against `expected` when given).
std::string write_trajectory(const Trajectory &traj);
Trajectory read_trajectory(std::string_view text, const ProductBasis *expected = nullptr);

struct ParsedState {
  StateVector coefficients;  // unit norm
  double raw_norm = 1.0;
  bool renormalized = false;
};

/// State expressions: sums and products of Lx(s), Ly(s), Lz(s), Lp(s), Lm(s),
/// T(s,l,m) and E with real or imaginary scalars, e.g. "Lx(0) - 2i*Lz(Ha)*Lz(Ca)".
/// The spin reference is an index or a spin name. The result is normalized.
ParsedState parse_state(std::string_view expression, const SpinSystem &sys);

struct Comparison {
  std::string trajectory;  // path of the trajectory compared against
  ScoreKind score = ScoreKind::rsp;
  Grouping grouping = Grouping::none;
};

struct ExperimentConfig {
  SpinSystem system;
  std::string initial;
  std::string target;
  ControlSet shape;  // dt, power and channels; amplitudes zero
  std::optional<std::string> initial_waveform;
  Parametrization parametrization = Parametrization::amplitudes;
  Ensemble ensemble;
  double power_penalty = 0.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;
  GradientMode gradient_mode = GradientMode::exact;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> analysis_specs;
  std::vector<Comparison> comparisons;
  double involvement_threshold = 0.05;
  std::optional<std::string> output_dir;
};

// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir);

// time column followed by one named column per series.
std::string series_csv(const std::vector<double> &times, const std::vector<std::string> &names,
                       const std::vector<std::vector<double>> &columns);

// Population CSV for every projector of a family, columns named after the subspaces.
std::string family_csv(const Trajectory &traj, ProjectorFamily family);
// rsp/none emits rsp_re and rsp_abs; otherwise one column named e.g. sg_rsp or rdn.
std::string similarity_csv(const SimilarityReport &report);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);

// Round-trip-safe decimal rendering, 17 significant digits.
std::string format_double(double v);

ProjectorFamily parse_family(const std::string &name);
Grouping parse_grouping(const std::string &name);
ScoreKind parse_score(const std::string &name);

}  // namespace spintraj::io
