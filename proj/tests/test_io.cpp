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
#include <sstream>

#include "oracles.hpp"
#include "spintraj/io.hpp"

using namespace spintraj;

namespace {

const std::string kBackbone = std::string(SPINTRAJ_DATA_DIR) + "/backbone.yaml";

Trajectory random_trajectory(const ProductBasis &basis, std::size_t points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Trajectory t;
  t.basis = std::make_shared<ProductBasis>(basis);
  for (std::size_t i = 0; i < points; ++i) {
    t.times.push_back(2e-5 * static_cast<double>(i));
    t.states.push_back(oracle::random_state(static_cast<Eigen::Index>(basis.size()), rng));
  }
  t.system_hash = "0123456789abcdef";
  t.control_hash = "fedcba9876543210";
  return t;
}

}  // namespace

TEST_CASE("minimal and reference spin systems") {
  const auto one = io::parse_system("spins:\n  - {isotope: 1H}\n");
  CHECK(one.size() == 1);
  CHECK(product_basis(one).size() == 4);

  const auto backbone = io::parse_system(io::read_file(kBackbone));
  REQUIRE(backbone.size() == 3);
  CHECK(backbone.couplings.size() == 2);
  CHECK(backbone.spins[2].offset_hz == 11000.0);
  CHECK(backbone.couplings[0].model == CouplingModel::weak);
  CHECK(backbone.couplings[1].model == CouplingModel::strong);
  CHECK(io::parse_system(io::serialize_system(backbone)) == backbone);
}

TEST_CASE("spin system defaults") {
  const auto sys = io::parse_system(R"(spins:
  - {name: A, isotope: 1H}
  - {name: B, isotope: 1H, offset_hz: 5}
  - {name: C, isotope: 13C}
  - {name: D, isotope: 2H}
couplings:
  - {between: [B, A], j_hz: 7}
  - {between: [0, C], j_hz: 140}
quadrupolar:
  - {spin: D, omega_q_hz: 1000, eta: 0.2}
)");
  CHECK(sys.spins[3].multiplicity == 3);
  CHECK(sys.couplings[0].i == 0);
  CHECK(sys.couplings[0].j == 1);
  CHECK(sys.couplings[0].model == CouplingModel::strong);
  CHECK(sys.couplings[1].model == CouplingModel::weak);
  CHECK(io::parse_system(io::serialize_system(sys)) == sys);
  CHECK(io::isotope_multiplicity("14N") == 3);
  CHECK_FALSE(io::isotope_multiplicity("Xx").has_value());
}

TEST_CASE("spin system errors name the problem") {
  auto message = [](const std::string &doc) {
    try {
      io::parse_system(doc);
    } catch (const ParseError &e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  const std::string dup = "spins:\n  - {isotope: 1H}\n  - {isotope: 1H}\ncouplings:\n"
                          "  - {between: [0, 1], j_hz: 7}\n  - {between: [1, 0], j_hz: 8}\n";
  CHECK(message(dup).find("duplicate coupling") != std::string::npos);
  CHECK(message(dup).find("line 6") != std::string::npos);
  CHECK(message("spins:\n  - {isotope: 1H, color: red}\n").find("unknown key") != std::string::npos);
  CHECK(message("spins:\n  - {isotope: Xx}\n").find("unknown isotope") != std::string::npos);
  CHECK(message("spins:\n  - {isotope: 2H}\nquadrupolar:\n  - {spin: 0, omega_q_hz: 1, eta: 2}\n").find("eta") !=
        std::string::npos);
  CHECK(message("spins:\n  - {isotope: 1H}\ncouplings:\n  - {between: [0, 3], j_hz: 1}\n").find("unknown spin") !=
        std::string::npos);
  CHECK(message("spins: [").find("line") != std::string::npos);
  CHECK(message("spins: []\n") != "accepted");
}

TEST_CASE("waveform round trip is exact") {
  std::mt19937_64 rng(625);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  ControlSet c;
  c.dt = 1.0e-3 / 625.0;
  c.power_hz = 15000.0;
  c.channels = {{"1H", Axis::x}, {"1H", Axis::y}};
  mat phi(1, 625);
  for (Eigen::Index n = 0; n < 625; ++n) phi(0, n) = u(rng);
  c = controls_from_phases(c, phi);
  const std::string text = io::write_waveform(c);
  const auto back = io::read_waveform(text);
  CHECK(back.dt == c.dt);
  CHECK(back.power_hz == 15000.0);
  CHECK(back.channels == c.channels);
  CHECK(back.amplitudes == c.amplitudes);
  CHECK(io::write_waveform(back) == text);
}

TEST_CASE("waveform errors") {
  const std::string head = "# dt=1e-5\n# power_hz=1000\n# channels=1H:x,1H:y\n";
  CHECK_THROWS_AS(io::read_waveform(head), ParseError);
  CHECK_THROWS_AS(io::read_waveform(head + "0.1 0.2\n0.3\n"), ParseError);
  CHECK_THROWS_AS(io::read_waveform(head + "0.1 nan\n"), ParseError);
  CHECK_THROWS_AS(io::read_waveform("# power_hz=1000\n# channels=1H:x\n0.1\n"), ParseError);
  CHECK_THROWS_AS(io::read_waveform("# dt=1e-5\n# power_hz=1000\n# channels=1H:z\n0.1\n"), ParseError);
  CHECK(io::read_waveform(head + "1 0\n0 1\n").steps() == 2);
}

TEST_CASE("trajectory round trips") {
  const ProductBasis b({2, 2, 2});
  const auto t = random_trajectory(b, 1001, 1);
  const auto back = io::read_trajectory(io::write_trajectory(t), &b);
  REQUIRE(back.points() == 1001);
  CHECK(back.times == t.times);
  for (std::size_t i = 0; i < t.points(); ++i) CHECK(back.states[i] == t.states[i]);
  CHECK(back.system_hash == t.system_hash);
  CHECK(back.control_hash == t.control_hash);
  CHECK(*back.basis == b);

  auto constant = random_trajectory(ProductBasis({3}), 3, 2);
  constant.states[1] = constant.states[2] = constant.states[0];
  const auto c2 = io::read_trajectory(io::write_trajectory(constant));
  for (const auto &s : c2.states) CHECK(s == constant.states[0]);
}

TEST_CASE("trajectory files with foreign ordering or wrong system are rejected") {
  const ProductBasis b({2});
  std::string text = io::write_trajectory(random_trajectory(b, 2, 3));
  const auto p1 = text.find("# label 1 ");
  const auto p2 = text.find("# label 3 ");
  REQUIRE(p1 != std::string::npos);
  REQUIRE(p2 != std::string::npos);
  std::string swapped = text;
  swapped.replace(p1, 14, text.substr(p2, 14));
  swapped.replace(p2, 14, "# label 3 (1,-1)");
  try {
    io::read_trajectory(swapped);
    FAIL("accepted a permuted label table");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("mapping mismatch") != std::string::npos);
  }
  const ProductBasis other({3});
  CHECK_THROWS_AS(io::read_trajectory(text, &other), ParseError);
  CHECK_THROWS_AS(io::read_trajectory("hello\n"), ParseError);
}

TEST_CASE("state expressions") {
  const auto sys = io::parse_system(io::read_file(kBackbone));
  const ProductBasis b = product_basis(sys);
  const auto lz = io::parse_state("Lz(Ha)", sys);
  CHECK(lz.renormalized);
  CHECK(lz.coefficients.norm() == doctest::Approx(1.0));
  CHECK(std::abs(lz.coefficients[b.index(BasisLabel{{{1, 0}, {0, 0}, {0, 0}}})] - 1.0) < 1e-15);

  const auto t = io::parse_state("T(2,1,1)", sys);
  CHECK(t.raw_norm == doctest::Approx(2.0));
  CHECK_FALSE(io::parse_state("T(0,1,0)", io::parse_system("spins: [{isotope: 1H}]")).renormalized);
  CHECK(std::abs(t.coefficients[b.index(BasisLabel{{{0, 0}, {0, 0}, {1, 1}}})] - 1.0) < 1e-15);

  const auto sum = io::parse_state("Lx(0) + i*Ly(0)", sys);
  const auto lp = io::parse_state("Lp(0)", sys);
  CHECK((sum.coefficients - lp.coefficients).norm() < 1e-14);

  const auto zz = io::parse_state("2*Lz(Ha)*Lz(CA) - (Lz(CO))/2", sys);
  CHECK(zz.coefficients.norm() == doctest::Approx(1.0));
  CHECK(io::parse_state("-2i*Lz(1)", sys).coefficients.norm() == doctest::Approx(1.0));

  CHECK_THROWS_AS(io::parse_state("Lq(0)", sys), ParseError);
  CHECK_THROWS_AS(io::parse_state("Lz(7)", sys), ParseError);
  CHECK_THROWS_AS(io::parse_state("Lz(0) - Lz(0)", sys), ParseError);
  CHECK_THROWS_AS(io::parse_state("Lz(0", sys), ParseError);
  CHECK_THROWS_AS(io::parse_state("T(0,2,0)", sys), ParseError);
}

TEST_CASE("experiment configuration") {
  const auto cfg = io::parse_config(R"(system: backbone.yaml
seed: 4
output: out
problem:
  initial: Lz(Ha)
  target: Lz(CO)
  steps: 10
  duration_s: 1e-3
  power_hz: 2000
  channels: [1H:x, 13C:y]
  parametrization: amplitudes
  ensemble: {isotope: 13C, offsets_hz: {from: -100, to: 100, count: 3}, power_scales: [0.9, 1.1]}
  max_iterations: 20
analysis:
  specs: [local, corr-orders]
  compare:
    - {trajectory: other.txt, score: rdn, grouping: bsg}
)",
                                    SPINTRAJ_DATA_DIR);
  CHECK(cfg.system.size() == 3);
  CHECK(cfg.seed == 4u);
  CHECK(cfg.shape.dt == doctest::Approx(1e-4));
  CHECK(cfg.shape.amplitudes.cols() == 10);
  CHECK(cfg.shape.channels[1] == Channel{"13C", Axis::y});
  CHECK(cfg.ensemble.offsets_hz == std::vector<double>{-100.0, 0.0, 100.0});
  CHECK(cfg.ensemble.power_scales.size() == 2);
  CHECK(cfg.max_iterations == 20);
  CHECK(cfg.analysis_specs.size() == 2);
  REQUIRE(cfg.comparisons.size() == 1);
  CHECK(cfg.comparisons[0].grouping == Grouping::bsg);
  CHECK(cfg.comparisons[0].score == ScoreKind::rdn);

  const std::string base = "system: {spins: [{isotope: 1H}]}\nproblem: {initial: Lz(0), target: Lx(0), steps: 2, "
                           "dt_s: 1e-5, power_hz: 1000, channels: [1H:x]";
  CHECK_NOTHROW(io::parse_config(base + "}\n", "."));
  CHECK_THROWS_AS(io::parse_config(base + ", colour: 1}\n", "."), ParseError);
  CHECK_THROWS_AS(io::parse_config(base + ", duration_s: 1}\n", "."), ParseError);
  CHECK_THROWS_AS(io::parse_config(base + ", parametrization: polar}\n", "."), ParseError);
  CHECK_THROWS_AS(io::parse_config(base + "}\nanalysis: {specs: [bogus]}\n", "."), ParseError);
  CHECK_THROWS_AS(io::parse_config("system: missing.yaml\n", "/nonexistent"), IoError);
}

TEST_CASE("csv emitters") {
  const ProductBasis b({2, 2});
  const auto t = random_trajectory(b, 4, 5);
  const std::string csv = io::family_csv(t, ProjectorFamily::corr_orders);
  CHECK(csv.rfind("time,corr_order_0,corr_order_1,corr_order_2\n", 0) == 0);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    double sum = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) sum += v[i] * v[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(io::family_csv(t, ProjectorFamily::coh_orders).rfind("time,coh_order_-2,coh_order_-1,", 0) == 0);

  CHECK(io::similarity_csv(rsp(t, t, Grouping::none)).rfind("time,rsp_re,rsp_abs\n", 0) == 0);
  CHECK(io::similarity_csv(rsp(t, t, Grouping::sg)).rfind("time,sg_rsp\n", 0) == 0);
  CHECK(io::similarity_csv(rdn(t, t, Grouping::none)).rfind("time,rdn\n", 0) == 0);
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_THROWS_AS(io::parse_family("everything"), DomainError);
  CHECK_THROWS_AS(io::read_file("/nonexistent/file"), IoError);
}
