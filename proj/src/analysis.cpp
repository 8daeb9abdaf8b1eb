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

#include "spintraj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spintraj {

namespace {

void check_trajectory(const Trajectory &traj) {
  if (!traj.basis) throw DomainError("trajectory has no basis");
  if (traj.states.size() != traj.times.size()) throw DomainError("trajectory times and states differ in length");
  for (const auto &s : traj.states)
    if (static_cast<std::size_t>(s.size()) != traj.basis->size())
      throw DomainError("trajectory state does not match its basis");
}

void check_pair(const Trajectory &a, const Trajectory &b) {
  check_trajectory(a);
  check_trajectory(b);
  if (!(*a.basis == *b.basis)) throw DomainError("trajectories live in different bases");
  if (a.times.size() != b.times.size()) throw DomainError("trajectories have different numbers of points");
  for (std::size_t t = 0; t < a.times.size(); ++t)
    if (std::abs(a.times[t] - b.times[t]) > 1e-12 * std::max(1.0, std::abs(a.times[t])))
      throw DomainError("trajectories are sampled on different time grids");
}

mat grouped_values(const Trajectory &traj, Grouping grouping) {
  if (grouping == Grouping::sg) return sg_transform(traj).values;
  return bsg_transform(traj).values;
}

SimilarityReport make_report(ScoreKind kind, Grouping grouping, const Trajectory &a) {
  SimilarityReport r;
  r.kind = kind;
  r.grouping = grouping;
  r.times = a.times;
  r.scores.reserve(a.times.size());
  return r;
}

}  // namespace

std::string SubspaceSpec::name() const {
  switch (kind) {
    case SubspaceKind::correlation_order: return "corr_order_" + std::to_string(value);
    case SubspaceKind::coherence_order: return "coh_order_" + std::to_string(value);
    case SubspaceKind::local_spin: return "local_spin_" + std::to_string(value);
    case SubspaceKind::involving: return "involving_" + std::to_string(value);
    case SubspaceKind::custom: return "custom";
  }
  return "custom";
}

std::size_t Projector::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

Projector build_projector(const ProductBasis &basis, SubspaceSpec spec) {
  const int n_spins = static_cast<int>(basis.spins());
  switch (spec.kind) {
    case SubspaceKind::correlation_order:
      if (spec.value < 0 || spec.value > n_spins) throw DomainError("correlation order out of range");
      break;
    case SubspaceKind::coherence_order:
      if (std::abs(spec.value) > basis.max_coherence()) throw DomainError("coherence order out of range");
      break;
    case SubspaceKind::local_spin:
    case SubspaceKind::involving:
      if (spec.value < 0 || spec.value >= n_spins) throw DomainError("spin index out of range");
      break;
    case SubspaceKind::custom: throw DomainError("custom projectors are built from an explicit mask");
  }
  Projector p;
  p.spec = spec;
  p.name = spec.name();
  p.mask.resize(basis.size());
  const auto k = static_cast<std::size_t>(std::max(spec.value, 0));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto &label = basis.label(i);
    switch (spec.kind) {
      case SubspaceKind::correlation_order: p.mask[i] = correlation_order(label) == spec.value; break;
      case SubspaceKind::coherence_order: p.mask[i] = coherence_order(label) == spec.value; break;
      case SubspaceKind::local_spin:
        p.mask[i] = correlation_order(label) == 1 && label.components[k].l > 0;
        break;
      case SubspaceKind::involving: p.mask[i] = label.components[k].l > 0; break;
      case SubspaceKind::custom: break;
    }
  }
  return p;
}

Projector custom_projector(std::vector<bool> mask, std::string name) {
  Projector p;
  p.spec = {SubspaceKind::custom, 0};
  p.name = std::move(name);
  p.mask = std::move(mask);
  return p;
}

double population(const Projector &projector, const StateVector &rho) {
  if (static_cast<std::size_t>(rho.size()) != projector.mask.size())
    throw DomainError("state dimension does not match projector");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (projector.mask[static_cast<std::size_t>(i)]) sum += std::norm(rho[i]);
  return std::sqrt(sum);
}

std::vector<double> population_series(const Projector &projector, const Trajectory &traj) {
  check_trajectory(traj);
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto &s : traj.states) out.push_back(population(projector, s));
  return out;
}

std::vector<Projector> projector_family(const ProductBasis &basis, ProjectorFamily family) {
  std::vector<Projector> out;
  const int n = static_cast<int>(basis.spins());
  switch (family) {
    case ProjectorFamily::corr_orders:
      for (int k = 0; k <= n; ++k) out.push_back(build_projector(basis, SubspaceSpec::corr_order(k)));
      break;
    case ProjectorFamily::coh_orders:
      for (int m = -basis.max_coherence(); m <= basis.max_coherence(); ++m)
        out.push_back(build_projector(basis, SubspaceSpec::coh_order(m)));
      break;
    case ProjectorFamily::local:
      for (int k = 0; k < n; ++k) out.push_back(build_projector(basis, SubspaceSpec::local_spin(k)));
      break;
    case ProjectorFamily::involvement:
      for (int k = 0; k < n; ++k) out.push_back(build_projector(basis, SubspaceSpec::involving(k)));
      break;
  }
  return out;
}

std::vector<std::vector<std::size_t>> sg_orbits(const ProductBasis &basis) {
  std::vector<std::vector<std::size_t>> orbits;
  std::vector<bool> seen(basis.size(), false);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (seen[i]) continue;
    BasisLabel flipped = basis.label(i);
    for (auto &c : flipped.components) c.m = -c.m;
    const std::size_t j = basis.index(flipped);
    seen[i] = seen[j] = true;
    orbits.push_back(i == j ? std::vector<std::size_t>{i} : std::vector<std::size_t>{i, j});
  }
  return orbits;
}

GroupedTrajectory sg_transform(const Trajectory &traj) {
  check_trajectory(traj);
  GroupedTrajectory g;
  g.mode = Grouping::sg;
  g.groups = sg_orbits(*traj.basis);
  g.values.resize(static_cast<Eigen::Index>(g.groups.size()), static_cast<Eigen::Index>(traj.points()));
  for (std::size_t t = 0; t < traj.points(); ++t) {
    const auto &s = traj.states[t];
    for (std::size_t o = 0; o < g.groups.size(); ++o) {
      double sum = 0.0;
      for (auto i : g.groups[o]) sum += std::norm(s[static_cast<Eigen::Index>(i)]);
      g.values(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(t)) = std::sqrt(sum);
    }
  }
  return g;
}

GroupedTrajectory bsg_transform(const Trajectory &traj) {
  check_trajectory(traj);
  GroupedTrajectory g;
  g.mode = Grouping::bsg;
  const auto projectors = projector_family(*traj.basis, ProjectorFamily::local);
  g.values.resize(static_cast<Eigen::Index>(projectors.size()), static_cast<Eigen::Index>(traj.points()));
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    g.groups.push_back({k});
    for (std::size_t t = 0; t < traj.points(); ++t)
      g.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = population(projectors[k], traj.states[t]);
  }
  return g;
}

std::vector<double> SimilarityReport::real() const {
  std::vector<double> out;
  for (const auto &s : scores) out.push_back(s.real());
  return out;
}

std::vector<double> SimilarityReport::magnitude() const {
  std::vector<double> out;
  for (const auto &s : scores) out.push_back(std::abs(s));
  return out;
}

double SimilarityReport::min() const {
  const auto r = real();
  return r.empty() ? 0.0 : *std::min_element(r.begin(), r.end());
}

double SimilarityReport::mean() const {
  const auto r = real();
  return r.empty() ? 0.0 : std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double SimilarityReport::min_magnitude() const {
  const auto r = magnitude();
  return r.empty() ? 0.0 : *std::min_element(r.begin(), r.end());
}

double SimilarityReport::mean_magnitude() const {
  const auto r = magnitude();
  return r.empty() ? 0.0 : std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

SimilarityReport rsp(const Trajectory &a, const Trajectory &b, Grouping grouping) {
  check_pair(a, b);
  auto r = make_report(ScoreKind::rsp, grouping, a);
  if (grouping == Grouping::none) {
    for (std::size_t t = 0; t < a.points(); ++t) r.scores.push_back(a.states[t].dot(b.states[t]));
    return r;
  }
  const mat ga = grouped_values(a, grouping), gb = grouped_values(b, grouping);
  for (Eigen::Index t = 0; t < ga.cols(); ++t) r.scores.emplace_back(ga.col(t).dot(gb.col(t)), 0.0);
  return r;
}

SimilarityReport rdn(const Trajectory &a, const Trajectory &b, Grouping grouping) {
  check_pair(a, b);
  auto r = make_report(ScoreKind::rdn, grouping, a);
  if (grouping == Grouping::none) {
    for (std::size_t t = 0; t < a.points(); ++t)
      r.scores.emplace_back(1.0 - (a.states[t] - b.states[t]).norm() / 2.0, 0.0);
    return r;
  }
  const mat ga = grouped_values(a, grouping), gb = grouped_values(b, grouping);
  for (Eigen::Index t = 0; t < ga.cols(); ++t) r.scores.emplace_back(1.0 - (ga.col(t) - gb.col(t)).norm() / 2.0, 0.0);
  return r;
}

std::vector<SpinInvolvement> involvement_report(const Trajectory &traj, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("involvement threshold must lie in (0, 1)");
  check_trajectory(traj);
  std::vector<SpinInvolvement> out;
  const auto projectors = projector_family(*traj.basis, ProjectorFamily::involvement);
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    const auto series = population_series(projectors[k], traj);
    const double peak = series.empty() ? 0.0 : *std::max_element(series.begin(), series.end());
    out.push_back({k, peak, peak < threshold});
  }
  return out;
}

std::string to_string(Grouping grouping) {
  switch (grouping) {
    case Grouping::none: return "none";
    case Grouping::sg: return "sg";
    case Grouping::bsg: return "bsg";
  }
  return "none";
}

std::string to_string(ScoreKind kind) {
  return kind == ScoreKind::rsp ? "rsp" : "rdn";
}

}  // namespace spintraj
