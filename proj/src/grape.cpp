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

#include "spintraj/grape.hpp"

#include <cmath>
#include <map>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

namespace spintraj {

namespace {

double re_inner(const cx_mat &a, const cx_mat &b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

SpinSystem shifted_system(const SpinSystem &sys, const std::string &isotope, double offset_hz) {
  SpinSystem out = sys;
  if (offset_hz == 0.0) return out;
  for (auto &s : out.spins)
    if (isotope.empty() || s.isotope == isotope) s.offset_hz += offset_hz;
  return out;
}

struct Evaluation {
  std::vector<double> per_member;
  double mean = 0.0;
  mat gradient;  // empty unless requested
};

// GRAPE in Hilbert space: rho -> U rho U^dagger with U = exp(-i H dt) reproduces the
// Liouville propagator exp(-i L dt) of the commutation superoperator exactly.
class HilbertModel {
 public:
  explicit HilbertModel(const ControlProblem &problem) : problem_(problem) {
    validate(problem);
    const ProductBasis basis = product_basis(problem.system);
    const cx_mat q = realization_matrix(basis);
    dim_ = static_cast<Eigen::Index>(basis.hilbert_dim());
    rho0_ = to_hilbert(q, basis.hilbert_dim(), problem.rho0);
    target_ = to_hilbert(q, basis.hilbert_dim(), problem.target);
    controls_ = control_operators(problem.system, problem.controls.channels);
    std::map<double, cx_mat> drifts;
    for (std::size_t m = 0; m < problem.ensemble.size(); ++m) {
      const auto [offset, scale] = problem.ensemble.member(m);
      auto it = drifts.find(offset);
      if (it == drifts.end())
        it = drifts.emplace(offset, drift_hamiltonian(shifted_system(problem.system, problem.ensemble.isotope, offset)))
                 .first;
      members_.push_back({it->second, scale});
    }
  }

  Evaluation evaluate(const ControlSet &controls, bool with_gradient) const {
    check(controls);
    Evaluation ev;
    const auto steps = static_cast<Eigen::Index>(controls.steps());
    const auto nch = static_cast<Eigen::Index>(controls_.size());
    if (with_gradient) ev.gradient = mat::Zero(nch, steps);

    std::vector<cx_mat> props(static_cast<std::size_t>(steps));
    std::vector<cx_mat> states(static_cast<std::size_t>(steps) + 1);
    std::vector<cx_mat> derivs;
    if (with_gradient) derivs.resize(static_cast<std::size_t>(steps * nch));

    const double dt = controls.dt;
    for (const auto &member : members_) {
      const double w = kTwoPi * controls.power_hz * member.scale;
      states[0] = rho0_;
      for (Eigen::Index n = 0; n < steps; ++n) {
        cx_mat h = member.drift;
        for (Eigen::Index k = 0; k < nch; ++k) {
          const double c = controls.amplitudes(k, n);
          if (c != 0.0) h += (w * c) * controls_[static_cast<std::size_t>(k)];
        }
        const cx_mat a = (-ci * dt) * h;
        auto &u = props[static_cast<std::size_t>(n)];
        if (with_gradient && problem_.gradient_mode == GradientMode::exact) {
          // exp([[A, E], [0, A]]) carries exp(A) on the diagonal and D exp(A)[E] top right.
          cx_mat aug = cx_mat::Zero(2 * dim_, 2 * dim_);
          aug.topLeftCorner(dim_, dim_) = a;
          aug.bottomRightCorner(dim_, dim_) = a;
          for (Eigen::Index k = 0; k < nch; ++k) {
            aug.topRightCorner(dim_, dim_) = (-ci * dt * w) * controls_[static_cast<std::size_t>(k)];
            const cx_mat e = aug.exp();
            if (k == 0) u = e.topLeftCorner(dim_, dim_);
            derivs[static_cast<std::size_t>(n * nch + k)] = e.topRightCorner(dim_, dim_);
          }
          if (nch == 0) u = a.exp();
        } else {
          u = a.exp();
          if (with_gradient)
            for (Eigen::Index k = 0; k < nch; ++k)
              derivs[static_cast<std::size_t>(n * nch + k)] =
                  ((-ci * dt * w) * controls_[static_cast<std::size_t>(k)]) * u;
        }
        states[static_cast<std::size_t>(n + 1)] = u * states[static_cast<std::size_t>(n)] * u.adjoint();
      }
      const double f = re_inner(target_, states[static_cast<std::size_t>(steps)]);
      if (!std::isfinite(f)) throw NumericError("non-finite fidelity during GRAPE evaluation");
      ev.per_member.push_back(f);

      if (!with_gradient) continue;
      cx_mat costate = target_;
      for (Eigen::Index n = steps; n-- > 0;) {
        const auto &u = props[static_cast<std::size_t>(n)];
        const auto &rho = states[static_cast<std::size_t>(n)];
        for (Eigen::Index k = 0; k < nch; ++k) {
          const auto &du = derivs[static_cast<std::size_t>(n * nch + k)];
          const cx_mat d = du * rho * u.adjoint() + u * rho * du.adjoint();
          ev.gradient(k, n) += re_inner(costate, d);
        }
        costate = u.adjoint() * costate * u;
      }
    }
    double sum = 0.0;
    for (double f : ev.per_member) sum += f;
    const double inv = 1.0 / static_cast<double>(ev.per_member.size());
    ev.mean = sum * inv;
    if (with_gradient) {
      ev.gradient *= inv;
      if (!ev.gradient.allFinite()) throw NumericError("non-finite GRAPE gradient");
    }
    return ev;
  }

 private:
  struct Member {
    cx_mat drift;
    double scale;
  };

  void check(const ControlSet &controls) const {
    validate(controls);
    if (controls.channels != problem_.controls.channels)
      throw DomainError("control channels differ from the problem definition");
  }

  const ControlProblem &problem_;
  Eigen::Index dim_ = 0;
  cx_mat rho0_, target_;
  std::vector<cx_mat> controls_;
  std::vector<Member> members_;
};

}  // namespace

std::pair<double, double> Ensemble::member(std::size_t index) const {
  if (index >= size()) throw DomainError("ensemble member index out of range");
  return {offsets_hz[index / power_scales.size()], power_scales[index % power_scales.size()]};
}

void validate(const ControlProblem &problem) {
  validate(problem.system);
  validate(problem.controls);
  const auto d = static_cast<Eigen::Index>(problem.system.liouville_dim());
  if (problem.rho0.size() != d || problem.target.size() != d)
    throw DomainError("initial and target states must match the Liouville dimension " + std::to_string(d));
  if (std::abs(problem.rho0.norm() - 1.0) > 1e-12) throw DomainError("initial state must have unit norm");
  if (std::abs(problem.target.norm() - 1.0) > 1e-12) throw DomainError("target state must have unit norm");
  if (problem.ensemble.offsets_hz.empty() || problem.ensemble.power_scales.empty())
    throw DomainError("ensemble lists must be non-empty");
  if (!problem.ensemble.isotope.empty()) {
    bool found = false;
    for (const auto &s : problem.system.spins) found = found || s.isotope == problem.ensemble.isotope;
    if (!found) throw DomainError("ensemble isotope '" + problem.ensemble.isotope + "' absent from the system");
  }
  if (!(problem.power_penalty >= 0.0)) throw DomainError("power penalty must be nonnegative");
  if (problem.max_iterations < 0) throw DomainError("iteration cap must be nonnegative");
  if (!(problem.tolerance > 0.0)) throw DomainError("gradient tolerance must be positive");
  if (problem.parametrization == Parametrization::phases) (void)phase_pairs(problem.controls.channels);
}

std::string to_string(OptimizationStatus status) {
  switch (status) {
    case OptimizationStatus::converged: return "converged";
    case OptimizationStatus::iteration_limit: return "iteration_limit";
    case OptimizationStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

double fidelity(const StateVector &final_state, const StateVector &target) {
  if (final_state.size() != target.size()) throw DomainError("fidelity: state dimensions differ");
  return target.dot(final_state).real();  // dot() conjugates its left operand
}

EnsembleFidelity ensemble_fidelity(const ControlProblem &problem, const ControlSet &controls) {
  const auto ev = HilbertModel(problem).evaluate(controls, false);
  return {ev.mean, ev.per_member};
}

mat grape_gradient(const ControlProblem &problem, const ControlSet &controls) {
  return HilbertModel(problem).evaluate(controls, true).gradient;
}

std::vector<std::pair<std::size_t, std::size_t>> phase_pairs(const std::vector<Channel> &channels) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::string> isotopes;
  for (const auto &ch : channels)
    if (std::find(isotopes.begin(), isotopes.end(), ch.isotope) == isotopes.end()) isotopes.push_back(ch.isotope);
  for (const auto &iso : isotopes) {
    std::vector<std::size_t> xs, ys;
    for (std::size_t k = 0; k < channels.size(); ++k) {
      if (channels[k].isotope != iso) continue;
      (channels[k].axis == Axis::x ? xs : ys).push_back(k);
    }
    if (xs.size() != 1 || ys.size() != 1)
      throw DomainError("phase parametrization needs exactly one x and one y channel for isotope '" + iso + "'");
    pairs.emplace_back(xs[0], ys[0]);
  }
  return pairs;
}

mat phase_chain_rule(const mat &gradient_xy, const ControlSet &controls) {
  const auto pairs = phase_pairs(controls.channels);
  if (gradient_xy.rows() != controls.amplitudes.rows() || gradient_xy.cols() != controls.amplitudes.cols())
    throw DomainError("gradient shape does not match the control set");
  mat out(static_cast<Eigen::Index>(pairs.size()), controls.amplitudes.cols());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto kx = static_cast<Eigen::Index>(pairs[p].first), ky = static_cast<Eigen::Index>(pairs[p].second);
    for (Eigen::Index n = 0; n < controls.amplitudes.cols(); ++n) {
      const double cx = controls.amplitudes(kx, n), cy = controls.amplitudes(ky, n);
      const double amp = std::hypot(cx, cy);
      const double phi = std::atan2(cy, cx);
      out(static_cast<Eigen::Index>(p), n) =
          amp * (-std::sin(phi) * gradient_xy(kx, n) + std::cos(phi) * gradient_xy(ky, n));
    }
  }
  return out;
}

ControlSet controls_from_phases(const ControlSet &shape, const mat &phases) {
  const auto pairs = phase_pairs(shape.channels);
  if (phases.rows() != static_cast<Eigen::Index>(pairs.size()))
    throw DomainError("phase matrix needs one row per x/y channel pair");
  ControlSet out = shape;
  out.amplitudes = mat::Zero(static_cast<Eigen::Index>(shape.channels.size()), phases.cols());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (Eigen::Index n = 0; n < phases.cols(); ++n) {
      const double phi = phases(static_cast<Eigen::Index>(p), n);
      out.amplitudes(static_cast<Eigen::Index>(pairs[p].first), n) = std::cos(phi);
      out.amplitudes(static_cast<Eigen::Index>(pairs[p].second), n) = std::sin(phi);
    }
  return out;
}

mat phases_of(const ControlSet &controls) {
  const auto pairs = phase_pairs(controls.channels);
  mat out(static_cast<Eigen::Index>(pairs.size()), controls.amplitudes.cols());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (Eigen::Index n = 0; n < controls.amplitudes.cols(); ++n)
      out(static_cast<Eigen::Index>(p), n) = std::atan2(controls.amplitudes(static_cast<Eigen::Index>(pairs[p].second), n),
                                                        controls.amplitudes(static_cast<Eigen::Index>(pairs[p].first), n));
  return out;
}

ControlSet random_guess(const ControlSet &shape, Parametrization parametrization, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (parametrization == Parametrization::phases) {
    const auto pairs = phase_pairs(shape.channels);
    std::uniform_real_distribution<double> dist(0.0, kTwoPi);
    mat phases(static_cast<Eigen::Index>(pairs.size()), shape.amplitudes.cols());
    for (Eigen::Index n = 0; n < phases.cols(); ++n)
      for (Eigen::Index p = 0; p < phases.rows(); ++p) phases(p, n) = dist(rng);
    return controls_from_phases(shape, phases);
  }
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  ControlSet out = shape;
  for (Eigen::Index n = 0; n < out.amplitudes.cols(); ++n)
    for (Eigen::Index k = 0; k < out.amplitudes.rows(); ++k) out.amplitudes(k, n) = dist(rng);
  return out;
}

OptimizationReport optimize(const ControlProblem &problem) {
  const HilbertModel model(problem);
  const ControlSet &shape = problem.controls;
  const bool phases = problem.parametrization == Parametrization::phases;
  const double penalty = phases ? 0.0 : problem.power_penalty;

  auto unpack = [&](const vec &x) {
    if (phases) {
      const auto pairs = static_cast<Eigen::Index>(phase_pairs(shape.channels).size());
      return controls_from_phases(shape, Eigen::Map<const mat>(x.data(), pairs, shape.amplitudes.cols()));
    }
    ControlSet c = shape;
    c.amplitudes = Eigen::Map<const mat>(x.data(), shape.amplitudes.rows(), shape.amplitudes.cols());
    return c;
  };

  const Objective objective = [&](const vec &x, vec &grad) {
    const ControlSet c = unpack(x);
    const auto ev = model.evaluate(c, true);
    mat g = phases ? phase_chain_rule(ev.gradient, c) : mat(ev.gradient - 2.0 * penalty * c.amplitudes);
    grad = Eigen::Map<const vec>(g.data(), g.size());
    return ev.mean - penalty * c.amplitudes.squaredNorm();
  };

  vec x0;
  if (phases) {
    const mat p = phases_of(shape);
    x0 = Eigen::Map<const vec>(p.data(), p.size());
  } else {
    x0 = Eigen::Map<const vec>(shape.amplitudes.data(), shape.amplitudes.size());
  }

  LbfgsOptions options;
  options.max_iterations = problem.max_iterations;
  options.gradient_tolerance = problem.tolerance;
  const auto result = maximize(objective, x0, options);

  OptimizationReport report;
  report.initial_fidelity = model.evaluate(unpack(x0), false).mean;
  report.controls = unpack(result.x);
  const auto final_eval = model.evaluate(report.controls, false);
  report.final_fidelity = final_eval.mean;
  report.member_fidelities = final_eval.per_member;
  report.iterations = result.iterations;
  report.evaluations = result.evaluations;
  report.objective_history = result.value_history;
  report.gradient_norms = result.gradient_norm_history;
  switch (result.status) {
    case LbfgsStatus::converged: report.status = OptimizationStatus::converged; break;
    case LbfgsStatus::iteration_limit: report.status = OptimizationStatus::iteration_limit; break;
    case LbfgsStatus::line_search_failed: report.status = OptimizationStatus::line_search_failed; break;
  }
  return report;
}

}  // namespace spintraj
