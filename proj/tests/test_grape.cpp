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

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spintraj/grape.hpp"

using namespace spintraj;

namespace {

StateVector normalized(const ProductBasis &b, const cx_mat &op) { return to_liouville(b, op).normalized(); }

ControlProblem single_spin_problem(int steps, double dt, double power) {
  ControlProblem p;
  p.system.spins = {{"1H", 2, 0.0, "H"}};
  const ProductBasis b = product_basis(p.system);
  p.rho0 = normalized(b, spin_operator(p.system, 0, SpinAxis::z));
  p.target = normalized(b, spin_operator(p.system, 0, SpinAxis::x));
  p.controls.dt = dt;
  p.controls.power_hz = power;
  p.controls.channels = {{"1H", Axis::x}, {"1H", Axis::y}};
  p.controls.amplitudes = mat::Zero(2, steps);
  return p;
}

ControlProblem spin1_problem() {
  ControlProblem p;
  p.system.spins = {{"2H", 3, 0.0, "D"}};
  p.system.quadrupolar = {{0, 10000.0, 0.5}};
  const ProductBasis b = product_basis(p.system);
  p.rho0 = StateVector::Zero(9);
  p.rho0[b.index(BasisLabel{{{1, 0}}})] = 1.0;
  p.target = StateVector::Zero(9);
  p.target[b.index(BasisLabel{{{2, 2}}})] = 1.0;
  ControlSet shape;
  shape.dt = 1e-3 / 200.0;
  shape.power_hz = 10000.0;
  shape.channels = {{"2H", Axis::x}, {"2H", Axis::y}};
  shape.amplitudes = mat::Zero(2, 200);
  p.parametrization = Parametrization::phases;
  p.controls = random_guess(shape, p.parametrization, 1);
  return p;
}

}  // namespace

TEST_CASE("gradient matches central finite differences on random problems") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = oracle::random_problem(rng);
    const mat g = grape_gradient(p, p.controls);
    const mat fd = oracle::fd_gradient(p, p.controls, 1e-6);
    CHECK(oracle::max_relative_error(g, fd) < 1e-6);
  }
}

TEST_CASE("gradient with an ensemble matches finite differences") {
  std::mt19937_64 rng(77);
  auto p = oracle::random_problem(rng);
  p.ensemble.isotope = "1H";
  p.ensemble.offsets_hz = {-200.0, 0.0, 350.0};
  p.ensemble.power_scales = {0.8, 1.1};
  const mat g = grape_gradient(p, p.controls);
  CHECK(oracle::max_relative_error(g, oracle::fd_gradient(p, p.controls, 1e-6)) < 1e-6);
  CHECK(ensemble_fidelity(p, p.controls).mean == doctest::Approx(oracle::liouville_fidelity(p, p.controls)).epsilon(1e-12));
}

TEST_CASE("first-order gradient approaches the exact one for short steps") {
  auto p = single_spin_problem(1, 1e-7, 1000.0);
  p.system.spins[0].offset_hz = 200.0;
  std::mt19937_64 rng(4);
  p.rho0 = oracle::random_state(4, rng);
  p.target = oracle::random_state(4, rng);
  p.controls.amplitudes << 0.3, -0.2;
  const mat exact = grape_gradient(p, p.controls);
  p.gradient_mode = GradientMode::first_order;
  const mat approx = grape_gradient(p, p.controls);
  CHECK(oracle::max_relative_error(approx, exact) < 1e-4);

  // dt * w * Im<target|[C_k, rho0]> in the small-step limit
  const ProductBasis b = product_basis(p.system);
  const double w = kTwoPi * p.controls.power_hz;
  const cx_mat lx = commutation_superoperator(b, spin_operator(p.system, 0, SpinAxis::x));
  CHECK(approx(0, 0) == doctest::Approx(p.controls.dt * w * p.target.dot(lx * p.rho0).imag()).epsilon(1e-3));
}

TEST_CASE("gradient vanishes at an attained maximum") {
  auto p = single_spin_problem(4, 1e-4, 1000.0);
  p.target = p.rho0;
  CHECK(grape_gradient(p, p.controls).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK(ensemble_fidelity(p, p.controls).mean == doctest::Approx(1.0));
}

TEST_CASE("ensemble fidelity examples") {
  std::mt19937_64 rng(8);
  auto p = oracle::random_problem(rng);
  const auto traj = propagate(p.system, p.controls, p.rho0);
  const auto ef = ensemble_fidelity(p, p.controls);
  REQUIRE(ef.per_member.size() == 1);
  CHECK(ef.mean == doctest::Approx(fidelity(traj.states.back(), p.target)).epsilon(1e-12));

  auto q = single_spin_problem(3, 1e-4, 1000.0);
  CHECK(std::abs(ensemble_fidelity(q, q.controls).mean) < 1e-15);

  Ensemble e{"1H", {-1.0, 1.0}, {0.5, 1.0, 2.0}};
  CHECK(e.size() == 6);
  CHECK(e.member(0) == std::pair{-1.0, 0.5});
  CHECK(e.member(4) == std::pair{1.0, 1.0});
}

TEST_CASE("fidelity is bounded for unit endpoints") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10; ++i) {
    const auto p = oracle::random_problem(rng);
    for (double f : ensemble_fidelity(p, p.controls).per_member) CHECK(std::abs(f) <= 1.0 + 1e-12);
  }
}

TEST_CASE("phase chain rule") {
  ControlSet c;
  c.dt = 1e-4;
  c.power_hz = 1000.0;
  c.channels = {{"1H", Axis::x}, {"1H", Axis::y}};
  c.amplitudes = mat(2, 2);
  const double a = 0.7;
  c.amplitudes << a, 0.0, 0.0, a;  // phases 0 and pi/2
  mat g(2, 2);
  g << 3.0, 5.0, 7.0, 11.0;
  const mat d = phase_chain_rule(g, c);
  CHECK(d(0, 0) == doctest::Approx(a * 7.0));
  CHECK(d(0, 1) == doctest::Approx(-a * 5.0));

  c.channels = {{"1H", Axis::x}, {"13C", Axis::y}};
  CHECK_THROWS_AS(phase_chain_rule(g, c), DomainError);
}

TEST_CASE("phase gradient matches finite differences in phi") {
  std::mt19937_64 rng(31);
  auto p = oracle::random_problem(rng);
  p.controls.channels = {{"1H", Axis::x}, {"1H", Axis::y}};
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  mat phi(1, 6);
  for (Eigen::Index n = 0; n < 6; ++n) phi(0, n) = u(rng);
  const ControlSet c = controls_from_phases(p.controls, phi);
  const mat got = phase_chain_rule(grape_gradient(p, c), c);
  mat fd(1, 6);
  const double h = 1e-6;
  for (Eigen::Index n = 0; n < 6; ++n) {
    mat up = phi, dn = phi;
    up(0, n) += h;
    dn(0, n) -= h;
    fd(0, n) = (oracle::liouville_fidelity(p, controls_from_phases(p.controls, up)) -
                oracle::liouville_fidelity(p, controls_from_phases(p.controls, dn))) /
               (2.0 * h);
  }
  CHECK(oracle::max_relative_error(got, fd) < 1e-6);
  CHECK((phases_of(c).array().cos() - phi.array().cos()).abs().maxCoeff() < 1e-14);
}

TEST_CASE("single spin converges to a pi/2 rotation") {
  auto p = single_spin_problem(1, 1e-4, 1000.0);
  p.controls = random_guess(p.controls, Parametrization::amplitudes, 3);
  const auto r = optimize(p);
  CHECK(r.final_fidelity >= 0.999);
  CHECK(r.final_fidelity >= r.initial_fidelity);
  // Lz -> Lx is a +y rotation of pi/2: flip angle 2pi*power*c*dt = pi/2.
  const double cx = r.controls.amplitudes(0, 0), cy = r.controls.amplitudes(1, 0);
  CHECK(std::abs(cx) < 0.05);
  CHECK(cy == doctest::Approx(0.25 / (p.controls.power_hz * p.controls.dt)).epsilon(0.02));
}

TEST_CASE("spin-1 transfer climbs to the universal bound") {
  auto p = spin1_problem();
  p.max_iterations = 200;
  const auto r = optimize(p);
  CHECK(r.final_fidelity >= 0.70);
  CHECK(r.final_fidelity <= 1.0 / std::sqrt(2.0) + 1e-6);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i)
    CHECK(r.objective_history[i] >= r.objective_history[i - 1]);
  for (Eigen::Index n = 0; n < r.controls.amplitudes.cols(); ++n)
    CHECK(std::abs(std::hypot(r.controls.amplitudes(0, n), r.controls.amplitudes(1, n)) - 1.0) <= 2e-16);
}

TEST_CASE("fixed seeds give bit-identical optimization paths") {
  auto p = single_spin_problem(12, 2e-5, 2000.0);
  p.system.spins[0].offset_hz = 1500.0;
  p.ensemble.offsets_hz = {-1000.0, 0.0, 1000.0};
  p.max_iterations = 25;
  p.controls = random_guess(p.controls, Parametrization::amplitudes, 42);
  const auto a = optimize(p), b = optimize(p);
  CHECK(a.objective_history == b.objective_history);
  CHECK(a.controls.amplitudes == b.controls.amplitudes);
  CHECK(random_guess(p.controls, Parametrization::phases, 9).amplitudes ==
        random_guess(p.controls, Parametrization::phases, 9).amplitudes);
  CHECK(random_guess(p.controls, Parametrization::amplitudes, 9).amplitudes !=
        random_guess(p.controls, Parametrization::amplitudes, 10).amplitudes);
  const auto g = random_guess(p.controls, Parametrization::amplitudes, 9).amplitudes;
  CHECK(g.maxCoeff() <= 0.1);
  CHECK(g.minCoeff() >= -0.1);
}

TEST_CASE("x-only pulses give offset-symmetric ensemble fidelities") {
  auto p = single_spin_problem(20, 5e-5, 2000.0);
  const ProductBasis b = product_basis(p.system);
  p.target = -normalized(b, spin_operator(p.system, 0, SpinAxis::y));
  p.controls.channels = {{"1H", Axis::x}};
  p.controls.amplitudes = mat::Zero(1, 20);
  p.controls = random_guess(p.controls, Parametrization::amplitudes, 5);
  p.ensemble.offsets_hz = {-3000.0, -1500.0, 0.0, 1500.0, 3000.0};
  p.max_iterations = 40;
  const auto r = optimize(p);
  const auto ef = ensemble_fidelity(p, r.controls);
  CHECK(ef.per_member[0] == doctest::Approx(ef.per_member[4]).epsilon(1e-10));
  CHECK(ef.per_member[1] == doctest::Approx(ef.per_member[3]).epsilon(1e-10));
  CHECK(r.final_fidelity > r.initial_fidelity);
}

TEST_CASE("power penalty and problem validation") {
  auto p = single_spin_problem(2, 1e-4, 1000.0);
  p.controls = random_guess(p.controls, Parametrization::amplitudes, 1);
  CHECK_NOTHROW(validate(p));
  auto bad = p;
  bad.rho0 *= 2.0;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = p;
  bad.power_penalty = -1.0;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = p;
  bad.target = StateVector::Zero(9);
  CHECK_THROWS_AS(validate(bad), DomainError);

  p.power_penalty = 0.5;
  p.max_iterations = 50;
  const auto with = optimize(p);
  p.power_penalty = 0.0;
  const auto without = optimize(p);
  CHECK(with.controls.amplitudes.squaredNorm() < without.controls.amplitudes.squaredNorm());
  CHECK(to_string(OptimizationStatus::converged) == "converged");
}
