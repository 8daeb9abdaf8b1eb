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

#include "spintraj/cli.hpp"

#include <filesystem>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "spintraj/analysis.hpp"
#include "spintraj/grape.hpp"
#include "spintraj/io.hpp"
#include "spintraj/liouville.hpp"

namespace spintraj::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string family_file(const std::string &spec) { return spec + ".csv"; }

std::string compare_file(ScoreKind score, Grouping grouping) {
  return "compare_" + to_string(grouping) + "_" + to_string(score) + ".csv";
}

void write_analysis(const Trajectory &traj, const std::vector<std::string> &specs, double threshold,
                    const fs::path &dir, std::ostream &out) {
  for (const auto &spec : specs) {
    const auto family = io::parse_family(spec);
    io::write_file(dir / family_file(spec), io::family_csv(traj, family));
    if (family == ProjectorFamily::involvement) {
      std::string csv = "spin,max_involvement,droppable\n";
      for (const auto &r : involvement_report(traj, threshold)) {
        csv += std::to_string(r.spin) + "," + io::format_double(r.max_involvement) + "," +
               (r.droppable ? "true" : "false") + "\n";
        out << "spin " << r.spin << ": max involvement " << r.max_involvement
            << (r.droppable ? " (droppable)" : "") << "\n";
      }
      io::write_file(dir / "involvement_report.csv", csv);
    }
  }
}

int cmd_simulate(const std::string &system_path, const std::string &waveform_path, const std::string &initial,
                 const std::string &out_dir, std::ostream &out, std::ostream &err) {
  const auto sys = io::parse_system(io::read_file(system_path));
  const auto controls = io::read_waveform(io::read_file(waveform_path));
  const auto state = io::parse_state(initial, sys);
  if (state.renormalized) err << "warning: initial state rescaled from norm " << state.raw_norm << " to 1\n";
  const auto traj = propagate(sys, controls, state.coefficients);
  ensure_dir(out_dir);
  io::write_file(fs::path(out_dir) / "trajectory.txt", io::write_trajectory(traj));
  out << "wrote " << traj.points() << " points to " << (fs::path(out_dir) / "trajectory.txt").string() << "\n";
  return kOk;
}

int cmd_optimize(const std::string &config_path, const std::string &out_dir_flag, std::optional<std::uint64_t> seed,
                 std::ostream &out, std::ostream &err) {
  auto cfg = io::parse_config(io::read_file(config_path), fs::path(config_path).parent_path());
  if (seed) cfg.seed = seed;
  if (!cfg.seed) throw ParseError("config: 'seed' is required for optimize runs");
  std::string out_dir = out_dir_flag;
  if (out_dir.empty()) {
    if (!cfg.output_dir) throw DomainError("no output directory: pass --out or set 'output' in the config");
    out_dir = *cfg.output_dir;
  }

  ControlProblem problem;
  problem.system = cfg.system;
  const auto rho0 = io::parse_state(cfg.initial, cfg.system);
  const auto target = io::parse_state(cfg.target, cfg.system);
  if (rho0.renormalized) err << "warning: initial state rescaled from norm " << rho0.raw_norm << " to 1\n";
  if (target.renormalized) err << "warning: target state rescaled from norm " << target.raw_norm << " to 1\n";
  problem.rho0 = rho0.coefficients;
  problem.target = target.coefficients;
  problem.parametrization = cfg.parametrization;
  problem.ensemble = cfg.ensemble;
  problem.power_penalty = cfg.power_penalty;
  problem.max_iterations = cfg.max_iterations;
  problem.tolerance = cfg.tolerance;
  problem.gradient_mode = cfg.gradient_mode;
  if (cfg.initial_waveform) {
    problem.controls = io::read_waveform(io::read_file(*cfg.initial_waveform));
    if (problem.controls.channels != cfg.shape.channels || problem.controls.steps() != cfg.shape.steps())
      throw DomainError("initial guess waveform does not match the problem's channels and steps");
  } else {
    problem.controls = random_guess(cfg.shape, cfg.parametrization, *cfg.seed);
  }

  const auto report = optimize(problem);
  ensure_dir(out_dir);
  const fs::path dir(out_dir);
  io::write_file(dir / "waveform.txt", io::write_waveform(report.controls));

  nlohmann::json j;
  j["status"] = to_string(report.status);
  j["initial_fidelity"] = report.initial_fidelity;
  j["final_fidelity"] = report.final_fidelity;
  j["member_fidelities"] = report.member_fidelities;
  j["iterations"] = report.iterations;
  j["evaluations"] = report.evaluations;
  j["objective_history"] = report.objective_history;
  j["gradient_norms"] = report.gradient_norms;
  j["seed"] = *cfg.seed;
  io::write_file(dir / "report.json", j.dump(2) + "\n");

  const auto traj = propagate(problem.system, report.controls, problem.rho0);
  io::write_file(dir / "trajectory.txt", io::write_trajectory(traj));
  write_analysis(traj, cfg.analysis_specs, cfg.involvement_threshold, dir, out);
  for (const auto &cmp : cfg.comparisons) {
    const auto other = io::read_trajectory(io::read_file(cmp.trajectory), traj.basis.get());
    const auto rep = cmp.score == ScoreKind::rsp ? rsp(traj, other, cmp.grouping) : rdn(traj, other, cmp.grouping);
    io::write_file(dir / compare_file(cmp.score, cmp.grouping), io::similarity_csv(rep));
  }
  out << "status " << to_string(report.status) << ", fidelity " << report.final_fidelity << " after "
      << report.iterations << " iterations\n";
  return kOk;
}

int cmd_analyze(const std::string &traj_path, const std::vector<std::string> &specs, const std::string &system_path,
                double threshold, const std::string &out_dir, std::ostream &out) {
  std::unique_ptr<ProductBasis> expected;
  if (!system_path.empty())
    expected = std::make_unique<ProductBasis>(product_basis(io::parse_system(io::read_file(system_path))));
  const auto traj = io::read_trajectory(io::read_file(traj_path), expected.get());
  for (const auto &s : specs) (void)io::parse_family(s);
  ensure_dir(out_dir);
  write_analysis(traj, specs, threshold, out_dir, out);
  return kOk;
}

int cmd_compare(const std::string &a_path, const std::string &b_path, const std::string &score,
                const std::string &grouping, const std::string &out_dir, std::ostream &out) {
  const auto kind = io::parse_score(score);
  const auto group = io::parse_grouping(grouping);
  const auto a = io::read_trajectory(io::read_file(a_path));
  const auto b = io::read_trajectory(io::read_file(b_path), a.basis.get());
  const auto rep = kind == ScoreKind::rsp ? rsp(a, b, group) : rdn(a, b, group);
  ensure_dir(out_dir);
  io::write_file(fs::path(out_dir) / compare_file(kind, group), io::similarity_csv(rep));
  out << to_string(group) << " " << score << ": min " << rep.min() << ", mean " << rep.mean() << "\n";
  return kOk;
}

int cmd_basis(const std::string &system_path, std::ostream &out) {
  const auto basis = product_basis(io::parse_system(io::read_file(system_path)));
  out << "index,label,correlation_order,coherence_order\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto &l = basis.label(i);
    out << i << ",\"" << to_string(l) << "\"," << correlation_order(l) << "," << coherence_order(l) << "\n";
  }
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Spin system trajectory simulation, optimal control and subspace analysis", "spintraj"};
  app.require_subcommand(1);

  std::string system, waveform, initial, out_dir, config, trajectory, traj_a, traj_b, score = "rsp",
                                                                                       grouping = "none";
  std::vector<std::string> specs;
  double threshold = 0.05;

  auto *simulate = app.add_subcommand("simulate", "Propagate a state under a waveform");
  simulate->add_option("--system", system, "Spin system file")->required();
  simulate->add_option("--waveform", waveform, "Waveform file")->required();
  simulate->add_option("--initial", initial, "Initial state expression, e.g. Lz(0)")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto *optimize_cmd = app.add_subcommand("optimize", "Optimize a pulse from an experiment config");
  optimize_cmd->add_option("--config", config, "Experiment config file")->required();
  optimize_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  std::optional<std::uint64_t> seed;
  optimize_cmd->add_option("--seed", seed, "Random seed for the initial guess (overrides the config)");

  auto *analyze = app.add_subcommand("analyze", "Subspace population time series");
  analyze->add_option("--trajectory", trajectory, "Trajectory file")->required();
  analyze->add_option("--spec", specs, "corr-orders | coh-orders | local | involvement")->required();
  analyze->add_option("--system", system, "Check the trajectory basis against this spin system");
  analyze->add_option("--threshold", threshold, "Involvement threshold for dropping spins");
  analyze->add_option("--out", out_dir, "Output directory")->required();

  auto *compare = app.add_subcommand("compare", "Similarity scores between two trajectories");
  compare->add_option("--traj-a", traj_a, "First trajectory")->required();
  compare->add_option("--traj-b", traj_b, "Second trajectory")->required();
  compare->add_option("--score", score, "rsp | rdn");
  compare->add_option("--grouping", grouping, "none | sg | bsg");
  compare->add_option("--out", out_dir, "Output directory")->required();

  auto *basis = app.add_subcommand("basis", "List basis labels with correlation and coherence orders");
  basis->add_option("--system", system, "Spin system file")->required();

  std::vector<const char *> argv{"spintraj"};
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(system, waveform, initial, out_dir, out, err);
    if (optimize_cmd->parsed()) return cmd_optimize(config, out_dir, seed, out, err);
    if (analyze->parsed()) return cmd_analyze(trajectory, specs, system, threshold, out_dir, out);
    if (compare->parsed()) return cmd_compare(traj_a, traj_b, score, grouping, out_dir, out);
    if (basis->parsed()) return cmd_basis(system, out);
  } catch (const IoError &e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kParse;
  } catch (const DomainError &e) {
    err << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const NumericError &e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace spintraj::cli
