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

#include <string>
#include <vector>

#include "spintraj/core.hpp"
#include "spintraj/liouville.hpp"
#include "spintraj/operator_algebra.hpp"

namespace spintraj {

enum class SubspaceKind { correlation_order, coherence_order, local_spin, involving, custom };

struct SubspaceSpec {
  SubspaceKind kind = SubspaceKind::custom;
  int value = 0;  // k, m or spin index

  static SubspaceSpec corr_order(int k) { return {SubspaceKind::correlation_order, k}; }
  static SubspaceSpec coh_order(int m) { return {SubspaceKind::coherence_order, m}; }
  static SubspaceSpec local_spin(int k) { return {SubspaceKind::local_spin, k}; }
  static SubspaceSpec involving(int k) { return {SubspaceKind::involving, k}; }

  // CSV column name: corr_order_2, coh_order_-1, local_spin_0, involving_1.
  std::string name() const;
};

/// Diagonal projector in the product basis, stored as a membership mask.
struct Projector {
  SubspaceSpec spec;
  std::string name;
  std::vector<bool> mask;

  std::size_t count() const;
};

Projector build_projector(const ProductBasis &basis, SubspaceSpec spec);
Projector custom_projector(std::vector<bool> mask, std::string name);

// ||P rho||
double population(const Projector &projector, const StateVector &rho);
std::vector<double> population_series(const Projector &projector, const Trajectory &traj);

enum class ProjectorFamily { corr_orders, coh_orders, local, involvement };

// corr_orders: k = 0..N; coh_orders: m = -M..M; local, involvement: one per spin.
std::vector<Projector> projector_family(const ProductBasis &basis, ProjectorFamily family);

enum class Grouping { none, sg, bsg };

struct GroupedTrajectory {
  Grouping mode = Grouping::none;
  // sg: basis indices of each orbit; bsg: {spin index} per entry.
  std::vector<std::vector<std::size_t>> groups;
  mat values;  // groups x timesteps
};

// Orbits of the simultaneous flip m_i -> -m_i on every spin, ordered by smallest member.
std::vector<std::vector<std::size_t>> sg_orbits(const ProductBasis &basis);

GroupedTrajectory sg_transform(const Trajectory &traj);
GroupedTrajectory bsg_transform(const Trajectory &traj);

enum class ScoreKind { rsp, rdn };

struct SimilarityReport {
  ScoreKind kind = ScoreKind::rsp;
  Grouping grouping = Grouping::none;
  std::vector<double> times;
  std::vector<cd> scores;  // imaginary part is zero except for ungrouped rsp

  std::vector<double> real() const;
  std::vector<double> magnitude() const;
  double min() const;  // of the real part
  double mean() const;
  double min_magnitude() const;
  double mean_magnitude() const;
};

SimilarityReport rsp(const Trajectory &a, const Trajectory &b, Grouping grouping);
SimilarityReport rdn(const Trajectory &a, const Trajectory &b, Grouping grouping);

struct SpinInvolvement {
  std::size_t spin = 0;
  double max_involvement = 0.0;
  bool droppable = false;
};

// Peak population of the subspace involving each spin; droppable below `threshold`.
std::vector<SpinInvolvement> involvement_report(const Trajectory &traj, double threshold);

std::string to_string(Grouping grouping);
std::string to_string(ScoreKind kind);

}  // namespace spintraj
