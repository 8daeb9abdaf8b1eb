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
#include "spintraj/analysis.hpp"
#include "spintraj/liouville.hpp"

using namespace spintraj;

namespace {

SpinSystem proton(double offset = 0.0) {
  SpinSystem sys;
  sys.spins.push_back({"1H", 2, offset, "H"});
  return sys;
}

StateVector basis_vector(const ProductBasis &b, BasisLabel l) {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(b.size()));
  v[static_cast<Eigen::Index>(b.index(l))] = 1.0;
  return v;
}

ControlSet constant_pulse(const std::string &iso, Axis axis, double power, double amp, double dt, int steps) {
  ControlSet c;
  c.dt = dt;
  c.power_hz = power;
  c.channels = {{iso, axis}};
  c.amplitudes = mat::Constant(1, steps, amp);
  return c;
}

}  // namespace

TEST_CASE("drift Hamiltonian terms") {
  SpinSystem sys = proton(100.0);
  cx_mat want = cx_mat::Zero(2, 2);
  want(0, 0) = kTwoPi * 50.0;
  want(1, 1) = -kTwoPi * 50.0;
  CHECK((drift_hamiltonian(sys) - want).norm() < 1e-9);

  SpinSystem pair;
  pair.spins = {{"1H", 2, 0.0, ""}, {"13C", 2, 0.0, ""}};
  pair.couplings = {{0, 1, 140.0, CouplingModel::weak}};
  cx_vec d(4);
  d << 0.25, -0.25, -0.25, 0.25;
  CHECK((drift_hamiltonian(pair) - kTwoPi * 140.0 * cx_mat(d.asDiagonal())).norm() < 1e-9);

  pair.couplings[0].model = CouplingModel::strong;
  const cx_mat h = drift_hamiltonian(pair);
  CHECK(std::abs(h(1, 2) - cd(kTwoPi * 140.0 * 0.5)) < 1e-9);

  SpinSystem q;
  q.spins = {{"2H", 3, 0.0, ""}};
  q.quadrupolar = {{0, 3000.0, 0.0}};
  cx_vec dq(3);
  dq << 1.0, -2.0, 1.0;
  CHECK((drift_hamiltonian(q) - kTwoPi * 1000.0 * cx_mat(dq.asDiagonal())).norm() < 1e-9);
  q.quadrupolar[0].eta = 1.0;
  const cx_mat hq = drift_hamiltonian(q);
  CHECK(std::abs(hq(0, 2) - cd(kTwoPi * 1000.0)) < 1e-9);
  CHECK((hq - hq.adjoint()).norm() < 1e-9);
}

TEST_CASE("control operators are isotope selective") {
  SpinSystem hh;
  hh.spins = {{"1H", 2, 0.0, ""}, {"1H", 2, 0.0, ""}};
  const auto ops = control_operators(hh, {{"1H", Axis::x}});
  CHECK((ops[0] - spin_operator(hh, 0, SpinAxis::x) - spin_operator(hh, 1, SpinAxis::x)).norm() < 1e-15);

  SpinSystem hc;
  hc.spins = {{"1H", 2, 0.0, ""}, {"13C", 2, 0.0, ""}};
  const auto c = control_operators(hc, {{"13C", Axis::y}});
  CHECK((c[0] - spin_operator(hc, 1, SpinAxis::y)).norm() < 1e-15);
  CHECK_THROWS_AS(control_operators(hc, {{"15N", Axis::x}}), DomainError);
}

TEST_CASE("commutation superoperator agrees with the Kronecker assembly") {
  std::mt19937_64 rng(11);
  for (const auto &mult : std::vector<std::vector<int>>{{2}, {3}, {2, 2}, {2, 3}}) {
    const ProductBasis basis(mult);
    const auto n = static_cast<Eigen::Index>(basis.hilbert_dim());
    const cx_mat h1 = oracle::random_hermitian(n, rng), h2 = oracle::random_hermitian(n, rng);
    const cx_mat l1 = commutation_superoperator(basis, h1);
    CHECK((l1 - oracle::kron_superoperator(basis, h1)).norm() < 1e-11 * l1.norm());
    CHECK((l1 - l1.adjoint()).norm() < 1e-11 * l1.norm());
    const cx_mat l12 = commutation_superoperator(basis, 2.0 * h1 - 0.5 * h2);
    CHECK((l12 - 2.0 * l1 + 0.5 * commutation_superoperator(basis, h2)).norm() < 1e-11 * l12.norm());
  }
}

TEST_CASE("commutation superoperator examples") {
  const auto sys = proton();
  const ProductBasis basis = product_basis(sys);
  const double w = 3.7;
  const cx_mat l = commutation_superoperator(basis, w * spin_operator(sys, 0, SpinAxis::z));
  const StateVector t11 = basis_vector(basis, BasisLabel{{{1, 1}}});
  CHECK((l * t11 - w * t11).norm() < 1e-14);
  CHECK(commutation_superoperator(basis, cx_mat::Zero(2, 2)).norm() == 0.0);
  CHECK(commutation_superoperator(basis, cx_mat::Identity(2, 2)).norm() < 1e-15);
  CHECK_THROWS_AS(commutation_superoperator(basis, cx_mat::Identity(3, 3)), DomainError);
}

TEST_CASE("step propagator against the eigendecomposition oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const ProductBasis basis({2, 2});
    const cx_mat l = commutation_superoperator(basis, 2000.0 * oracle::random_hermitian(4, rng));
    const double dt = 1e-4;
    const cx_mat u = step_propagator(l, dt);
    const cx_mat want = oracle::hermitian_propagator(l, dt);
    CHECK((u - want).norm() < 1e-12 * want.norm());
    CHECK((u.adjoint() * u - cx_mat::Identity(16, 16)).norm() < 1e-10);
    CHECK((u * u - step_propagator(l, 2.0 * dt)).norm() < 1e-10);
  }
}

TEST_CASE("step propagator edge cases") {
  CHECK((step_propagator(cx_mat::Zero(4, 4), 1e-3) - cx_mat::Identity(4, 4)).norm() == 0.0);
  cx_mat bad = cx_mat::Zero(4, 4);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step_propagator(bad, 1e-3), NumericError);
  CHECK_THROWS_AS(step_propagator(cx_mat::Zero(4, 4), 0.0), DomainError);
  CHECK_THROWS_AS(step_propagator(cx_mat::Zero(4, 3), 1.0), DomainError);
}

TEST_CASE("pi and pi/2 rotations") {
  const auto sys = proton();
  const ProductBasis basis = product_basis(sys);
  const StateVector z = basis_vector(basis, BasisLabel{{{1, 0}}});
  const cx_mat lx = commutation_superoperator(basis, spin_operator(sys, 0, SpinAxis::x));
  const cx_mat ly = commutation_superoperator(basis, spin_operator(sys, 0, SpinAxis::y));
  CHECK((step_propagator(lx, kPi) * z + z).norm() < 1e-12);

  const StateVector r = step_propagator(ly, kPi / 2.0) * z;
  const double transverse = std::norm(r[basis.index(BasisLabel{{{1, 1}}})]) +
                            std::norm(r[basis.index(BasisLabel{{{1, -1}}})]);
  CHECK(transverse == doctest::Approx(1.0).epsilon(1e-12));
  const StateVector x = to_liouville(basis, spin_operator(sys, 0, SpinAxis::x)).normalized();
  CHECK(std::abs(x.dot(r) - 1.0) < 1e-12);
}

TEST_CASE("propagate: nutation and constant trajectories") {
  const auto sys = proton();
  const ProductBasis basis = product_basis(sys);
  const StateVector z = basis_vector(basis, BasisLabel{{{1, 0}}});

  const double a = 1250.0;
  const auto pi = constant_pulse("1H", Axis::x, a, 1.0, 1.0 / (2.0 * a) / 10.0, 10);
  const auto traj = propagate(sys, pi, z);
  REQUIRE(traj.points() == 11);
  CHECK((traj.states.back() + z).norm() < 1e-12);
  CHECK(traj.times.back() == doctest::Approx(1.0 / (2.0 * a)));

  const auto idle = constant_pulse("1H", Axis::x, a, 0.0, 1e-4, 5);
  for (const auto &s : propagate(sys, idle, z).states) CHECK((s - z).norm() < 1e-15);

  const auto single = constant_pulse("1H", Axis::y, a, 1.0, 1.0 / (4.0 * a), 1);
  CHECK(propagate(sys, single, z).points() == 2);
}

TEST_CASE("propagate conserves norm and caching does not change results") {
  std::mt19937_64 rng(3);
  SpinSystem sys;
  sys.spins = {{"1H", 2, 120.0, "H"}, {"13C", 2, -80.0, "C"}, {"13C", 2, 900.0, "C2"}};
  sys.couplings = {{0, 1, 140.0, CouplingModel::weak}, {1, 2, 55.0, CouplingModel::strong}};
  ControlSet c;
  c.dt = 5e-5;
  c.power_hz = 2000.0;
  c.channels = {{"1H", Axis::x}, {"13C", Axis::y}};
  c.amplitudes = mat(2, 40);
  std::uniform_int_distribution<int> q(-2, 2);
  for (Eigen::Index i = 0; i < c.amplitudes.size(); ++i) c.amplitudes.data()[i] = 0.5 * q(rng);
  const StateVector rho0 = oracle::random_state(64, rng);
  const auto traj = propagate(sys, c, rho0);
  for (const auto &s : traj.states) CHECK(std::abs(s.norm() - 1.0) < 1e-9);

  // Reference without reuse: one propagator per step from the oracle.
  const ProductBasis basis = product_basis(sys);
  const cx_mat l0 = commutation_superoperator(basis, drift_hamiltonian(sys));
  const auto ops = control_operators(sys, c.channels);
  std::vector<cx_mat> lk;
  for (const auto &op : ops) lk.push_back(commutation_superoperator(basis, op));
  StateVector rho = rho0;
  for (Eigen::Index n = 0; n < c.amplitudes.cols(); ++n) {
    cx_mat l = l0;
    for (std::size_t k = 0; k < lk.size(); ++k) l += kTwoPi * c.power_hz * c.amplitudes(k, n) * lk[k];
    rho = oracle::hermitian_propagator(l, c.dt) * rho;
    CHECK((traj.states[n + 1] - rho).norm() < 1e-10);
  }
}

TEST_CASE("coherence orders are conserved under z-commuting drift") {
  std::mt19937_64 rng(9);
  SpinSystem sys;
  sys.spins = {{"1H", 2, 300.0, ""}, {"13C", 2, -700.0, ""}, {"13C", 2, 50.0, ""}};
  sys.couplings = {{0, 1, 140.0, CouplingModel::weak}, {1, 2, 55.0, CouplingModel::strong}};
  const ProductBasis basis = product_basis(sys);
  const auto idle = constant_pulse("1H", Axis::x, 1000.0, 0.0, 1e-4, 50);
  const auto traj = propagate(sys, idle, oracle::random_state(64, rng));
  for (int m = -3; m <= 3; ++m) {
    const auto p = build_projector(basis, SubspaceSpec::coh_order(m));
    const double p0 = population(p, traj.states.front());
    for (const auto &s : traj.states) CHECK(std::abs(population(p, s) - p0) < 1e-9);
  }
}

TEST_CASE("control set validation and fingerprints") {
  auto c = constant_pulse("1H", Axis::x, 1000.0, 1.0, 1e-4, 3);
  CHECK_NOTHROW(validate(c));
  CHECK(fingerprint(c).size() == 16);
  auto d = c;
  d.amplitudes(0, 1) = 0.5;
  CHECK(fingerprint(c) != fingerprint(d));
  CHECK(fingerprint(proton()) == fingerprint(proton()));
  CHECK(fingerprint(proton(1.0)) != fingerprint(proton()));
  c.dt = 0.0;
  CHECK_THROWS_AS(validate(c), DomainError);
  c.dt = 1e-4;
  c.amplitudes = mat::Constant(2, 3, 1.0);
  CHECK_THROWS_AS(validate(c), DomainError);
  CHECK(to_string(Channel{"13C", Axis::y}) == "13C:y");

  auto wrong = constant_pulse("1H", Axis::x, 1000.0, 1.0, 1e-4, 3);
  CHECK_THROWS_AS(propagate(proton(), wrong, StateVector::Zero(3)), DomainError);
}
