// Copyright 2026 The RQE Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rqelab/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"

#include "rqelab/crossplay.h"
#include "rqelab/games.h"
#include "rqelab/gridworld.h"
#include "rqelab/io_util.h"
#include "rqelab/markov_game.h"
#include "rqelab/rqe_finite.h"
#include "rqelab/rqe_gaussian.h"
#include "rqelab/trainer.h"

namespace rqelab {

namespace fs = std::filesystem;

std::vector<double> ParseGrid(const std::string& text) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(text);
  if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
      !(step > 0.0) || hi < lo) {
    throw std::invalid_argument("grid must be lo:hi:step, got '" + text + "'");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    double v = lo + k * step;
    if (v > hi + 1e-12 * std::max(1.0, std::abs(hi))) break;
    grid.push_back(std::min(v, hi));
  }
  return grid;
}

namespace {

struct FiniteOptions {
  std::string example;
  std::string game_path;
  double eps = 0.2;
  double tau = 0.0;
  int starts = 64;
  double tol = 1e-9;
  std::string tau_grid;
  double delta = 0.0;
  bool threshold = false;
  std::uint64_t seed = 0;
  std::string out = "tau_scan.csv";
};

FiniteCollabGame LoadFiniteGame(const FiniteOptions& opt) {
  if (!opt.game_path.empty()) {
    return FiniteCollabGame::FromJsonString(ReadFileText(opt.game_path));
  }
  if (opt.example == "coordination" || opt.example.empty()) {
    return MakeExampleCoordinationGame();
  }
  throw std::invalid_argument("unknown finite example: " + opt.example);
}

int CmdFinite(const FiniteOptions& opt, std::ostream& out) {
  FiniteCollabGame game = LoadFiniteGame(opt);
  std::ostringstream cfg;
  cfg << game.ToJsonString() << opt.eps << ":" << opt.tau << ":" << opt.starts
      << ":" << opt.tau_grid << ":" << opt.seed;
  std::uint64_t hash = HashConfigText(cfg.str());

  if (opt.threshold) {
    if (!(opt.delta > 0.0)) {
      throw std::invalid_argument("--threshold needs --delta > 0");
    }
    out << "free-riding threshold (delta=" << FormatDouble(opt.delta)
        << ", eps=" << FormatDouble(opt.eps)
        << "): " << FormatDouble(FreeRidingThreshold(game, opt.eps, opt.delta))
        << "\n";
    out << "min support mass: " << FormatDouble(MinSupportMass(game, opt.eps))
        << "\n";
    return 0;
  }

  if (!opt.tau_grid.empty()) {
    std::vector<double> grid = ParseGrid(opt.tau_grid);
    std::vector<TauScanRow> rows =
        TauScan(game, opt.eps, grid, opt.starts, opt.seed);
    std::ofstream os(opt.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + opt.out);
    WriteTauScanCsv(os, game, rows, hash);
    int max_eqs = 0;
    for (const auto& row : rows) {
      max_eqs = std::max(max_eqs, static_cast<int>(row.equilibria.size()));
    }
    out << "wrote " << opt.out << " (" << rows.size()
        << " tau rows, up to " << max_eqs << " equilibria per row)\n";
    return 0;
  }

  RiskProfile profile = RiskProfile::Shared(2, opt.tau, opt.eps);
  auto equilibria = EnumerateRqe(game, profile, opt.starts, opt.seed, opt.tol);
  out << equilibria.size() << " equilibria (tau=" << FormatDouble(opt.tau)
      << ", eps=" << FormatDouble(opt.eps) << ", starts=" << opt.starts
      << ")\n";
  for (size_t e = 0; e < equilibria.size(); ++e) {
    const auto& [x1, x2] = equilibria[e];
    out << "eq " << e << ": x1=[";
    for (size_t a = 0; a < x1.size(); ++a) {
      out << (a ? "," : "") << FormatDouble(x1[a]);
    }
    out << "] x2=[";
    for (size_t a = 0; a < x2.size(); ++a) {
      out << (a ? "," : "") << FormatDouble(x2[a]);
    }
    out << "] delta=" << FormatDouble(FreeRidingDegree(game, x1, x2))
        << " residual=" << FormatDouble(VerifyRqe(game, x1, x2, profile))
        << "\n";
  }
  return 0;
}

struct GaussianOptions {
  std::string example;
  std::string game_path;
  double abar = 1.0;
  double eps = 1.0;
  double tau = 0.0;
  std::string tau_grid;
  std::string out = "monotonicity.csv";
};

QuadraticAggregativeGame LoadGaussianGame(const GaussianOptions& opt) {
  if (!opt.game_path.empty()) {
    return QuadraticAggregativeGame::FromJsonString(ReadFileText(opt.game_path));
  }
  if (opt.example == "force" || opt.example.empty()) {
    return MakeExampleForceGame(opt.abar);
  }
  throw std::invalid_argument("unknown gaussian example: " + opt.example);
}

int CmdGaussian(const GaussianOptions& opt, std::ostream& out) {
  QuadraticAggregativeGame game = LoadGaussianGame(opt);
  std::ostringstream cfg;
  cfg << game.ToJsonString() << opt.eps << ":" << opt.tau << ":" << opt.tau_grid;
  std::uint64_t hash = HashConfigText(cfg.str());

  if (!opt.tau_grid.empty()) {
    std::vector<double> grid = ParseGrid(opt.tau_grid);
    auto rows = MonotonicityScan(game, opt.eps, grid);
    std::ofstream os(opt.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + opt.out);
    WriteMonotonicityCsv(os, game, rows, hash);
    int valid = 0;
    for (const auto& row : rows) valid += row.valid ? 1 : 0;
    out << "wrote " << opt.out << " (" << valid << "/" << rows.size()
        << " valid tau rows)\n";
    return 0;
  }

  RiskProfile profile = RiskProfile::Shared(game.num_players, opt.tau, opt.eps);
  if (!ValidityCondition(game, profile)) {
    out << "tau=" << FormatDouble(opt.tau)
        << " violates the validity condition (risk diverges)\n";
    return 1;
  }
  GaussianRqeReport report = SolveGaussianRqe(game, profile);
  out << "J=" << FormatDouble(report.shared_reward) << "\n";
  for (int i = 0; i < game.num_players; ++i) {
    out << "player " << (i + 1) << ": mean=[";
    for (int k = 0; k < game.dim; ++k) {
      out << (k ? "," : "") << FormatDouble(report.strategies[i].mean[k]);
    }
    out << "] cost=" << FormatDouble(report.private_costs[i]) << "\n";
  }
  return 0;
}

struct VerifyOptions {
  int instances = 20;
  std::uint64_t seed = 7;
  std::string out = "verify_report.json";
  bool inject_sign_flip = false;
};

int CmdVerify(const VerifyOptions& opt, std::ostream& out) {
  VerifyReport report = RunGradientVerification(opt.instances, opt.seed, 1e-4,
                                                1e-8, opt.inject_sign_flip);
  WriteFileText(opt.out, VerifyReportToJson(report));
  out << (report.pass ? "PASS" : "FAIL") << ": max policy-gradient rel err "
      << FormatDouble(report.max_rel_err_pi) << ", adversary "
      << FormatDouble(report.max_rel_err_p) << ", PDL residuals "
      << FormatDouble(report.max_pdl_residual_pi) << " / "
      << FormatDouble(report.max_pdl_residual_p) << " (" << opt.out << ")\n";
  return report.pass ? 0 : 1;
}

struct TrainOptions {
  std::string method = "ippo";
  std::string config_path;
  std::string env_path;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  double tau = -1.0;   // <0: keep config value
  double eps = -1.0;
  long steps = -1;
  std::string out = "runs";
};

int CmdTrain(const TrainOptions& opt, std::ostream& out) {
  if (opt.method != "ippo" && opt.method != "srpo") {
    throw std::invalid_argument("--method must be ippo or srpo");
  }
  TrainerConfig config;
  if (!opt.config_path.empty()) {
    config = TrainerConfig::FromJsonString(ReadFileText(opt.config_path));
  }
  if (opt.tau >= 0.0) config.tau = opt.tau;
  if (opt.eps >= 0.0) config.entropy_coef = opt.eps;
  if (opt.steps > 0) config.total_steps = opt.steps;
  config.seed = opt.base_seed;
  if (opt.method == "srpo" && !(config.tau > 0.0)) {
    throw std::invalid_argument("srpo needs --tau > 0");
  }
  GridConfig env_config;
  if (!opt.env_path.empty()) {
    env_config = GridConfig::FromJsonString(ReadFileText(opt.env_path));
  }

  std::ostringstream cfg;
  cfg << opt.method << ":" << config.ToJsonString() << ":"
      << env_config.ToJsonString() << ":" << opt.seeds;
  std::uint64_t hash = HashConfigText(cfg.str());
  fs::path run_dir = fs::path(opt.out) / HashHex(hash);
  fs::create_directories(run_dir / "checkpoints");
  WriteFileText((run_dir / "config.json").string(), cfg.str());

  for (int k = 0; k < opt.seeds; ++k) {
    TrainerConfig seed_config = config;
    seed_config.seed = DeriveSeed(opt.base_seed, k);
    TrainResult result = opt.method == "ippo"
                             ? TrainIppo(seed_config, env_config)
                             : TrainSrpo(seed_config, env_config);
    std::string tag = opt.method + "_seed" + std::to_string(k);
    std::ofstream curve(run_dir / ("curves_" + tag + ".csv"),
                        std::ios::binary);
    WriteCurveCsv(curve, result.curve, hash);
    SaveCheckpoint((run_dir / "checkpoints" / (tag + ".bin")).string(),
                   TeamToCheckpoint(result, hash, opt.method == "srpo"));
    out << tag << ": " << result.env_steps << " env steps, final return "
        << FormatDouble(result.curve.empty() ? 0.0
                                             : result.curve.back().mean_return)
        << "\n";
  }
  out << "artifacts in " << run_dir.string() << "\n";
  return 0;
}

struct CrossplayOptions {
  std::string checkpoint_dir;
  int episodes = 100;
  int episode_len = 100;
  std::uint64_t seed = 0;
  std::string env_path;
  std::string out = "crossplay";
};

int CmdCrossplay(const CrossplayOptions& opt, std::ostream& out) {
  GridConfig env_config;
  if (!opt.env_path.empty()) {
    env_config = GridConfig::FromJsonString(ReadFileText(opt.env_path));
  }
  std::vector<fs::path> files;
  if (!fs::is_directory(opt.checkpoint_dir)) {
    throw std::runtime_error("checkpoint directory not found: " +
                             opt.checkpoint_dir);
  }
  for (const auto& entry : fs::directory_iterator(opt.checkpoint_dir)) {
    if (entry.path().extension() == ".bin") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("no checkpoints in " + opt.checkpoint_dir);
  }
  std::vector<TrainedTeam> teams;
  for (const auto& file : files) {
    TrainResult loaded;
    TeamFromCheckpoint(LoadCheckpoint(file.string()), &loaded);
    TrainedTeam team;
    team.id = file.stem().string();
    team.method = team.id.substr(0, team.id.find('_'));
    team.policies = {loaded.policies[0], loaded.policies[1]};
    teams.push_back(std::move(team));
  }

  std::ostringstream cfg;
  cfg << env_config.ToJsonString() << opt.episodes << ":" << opt.episode_len
      << ":" << opt.seed;
  for (const auto& t : teams) cfg << ":" << t.id;
  std::uint64_t hash = HashConfigText(cfg.str());

  CrossPlayMatrix matrix =
      CrossPlay(teams, env_config, opt.episodes, opt.episode_len, opt.seed);
  fs::create_directories(opt.out);
  {
    std::ofstream os(fs::path(opt.out) / "matrix.csv", std::ios::binary);
    WriteMatrixCsv(os, matrix, hash);
  }
  {
    std::ofstream os(fs::path(opt.out) / "matrix_long.csv", std::ios::binary);
    WriteMatrixLongCsv(os, matrix, hash);
  }
  auto stats = ComputeTpCpStats(matrix);
  WriteFileText((fs::path(opt.out) / "stats.json").string(),
                StatsToJson(stats));
  for (const auto& s : stats) {
    out << s.method << ": TP " << FormatDouble(s.tp_mean) << " +- "
        << FormatDouble(s.tp_std) << ", CP " << FormatDouble(s.cp_mean)
        << " +- " << FormatDouble(s.cp_std) << ", drop "
        << FormatDouble(s.drop) << "\n";
  }
  out << "artifacts in " << opt.out << "\n";
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"rqe-lab: risk-averse equilibria and SRPO training workbench"};
  app.require_subcommand(1);

  FiniteOptions fin;
  auto* finite = app.add_subcommand("finite", "finite-game RQE solver");
  finite->add_option("--example", fin.example, "built-in game (coordination)");
  finite->add_option("--game", fin.game_path, "game JSON file");
  finite->add_option("--eps", fin.eps, "bounded rationality");
  finite->add_option("--tau", fin.tau, "risk aversion (0 = QRE)");
  finite->add_option("--starts", fin.starts, "multi-start count");
  finite->add_option("--tol", fin.tol, "solver tolerance");
  finite->add_option("--tau-grid", fin.tau_grid, "lo:hi:step scan grid");
  finite->add_option("--delta", fin.delta, "free-riding degree");
  finite->add_flag("--threshold", fin.threshold,
                   "print the free-riding tau threshold");
  finite->add_option("--seed", fin.seed, "rng seed");
  finite->add_option("--out", fin.out, "scan CSV path");

  GaussianOptions gau;
  auto* gaussian = app.add_subcommand("gaussian", "Gaussian RQE solver");
  gaussian->add_option("--example", gau.example, "built-in game (force)");
  gaussian->add_option("--game", gau.game_path, "game JSON file");
  gaussian->add_option("--abar", gau.abar, "force-game target");
  gaussian->add_option("--eps", gau.eps, "bounded rationality");
  gaussian->add_option("--tau", gau.tau, "risk aversion");
  gaussian->add_option("--tau-grid", gau.tau_grid, "lo:hi:step scan grid");
  gaussian->add_option("--out", gau.out, "scan CSV path");

  VerifyOptions ver;
  auto* verify = app.add_subcommand("verify", "gradient/PDL verification sweep");
  verify->add_option("--instances", ver.instances, "random instances");
  verify->add_option("--seed", ver.seed, "rng seed");
  verify->add_option("--out", ver.out, "JSON report path");
  verify->add_flag("--inject-sign-flip", ver.inject_sign_flip,
                   "negative control: corrupt one gradient entry");

  TrainOptions tra;
  auto* train = app.add_subcommand("train", "train gridworld agents");
  train->add_option("--method", tra.method, "ippo or srpo")->required();
  train->add_option("--config", tra.config_path, "trainer config JSON");
  train->add_option("--env", tra.env_path, "gridworld config JSON");
  train->add_option("--seeds", tra.seeds, "number of seeds");
  train->add_option("--seed", tra.base_seed, "base seed");
  train->add_option("--tau", tra.tau, "risk aversion override");
  train->add_option("--eps", tra.eps, "entropy coefficient override");
  train->add_option("--steps", tra.steps, "total env interactions override");
  train->add_option("--out", tra.out, "output root directory");

  CrossplayOptions cro;
  auto* crossplay = app.add_subcommand("crossplay", "cross-play evaluation");
  crossplay->add_option("--checkpoints", cro.checkpoint_dir, "checkpoint dir")
      ->required();
  crossplay->add_option("--episodes", cro.episodes, "episodes per pairing");
  crossplay->add_option("--len", cro.episode_len, "episode length");
  crossplay->add_option("--seed", cro.seed, "rng seed");
  crossplay->add_option("--env", cro.env_path, "gridworld config JSON");
  crossplay->add_option("--out", cro.out, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (finite->parsed()) return CmdFinite(fin, out);
    if (gaussian->parsed()) return CmdGaussian(gau, out);
    if (verify->parsed()) return CmdVerify(ver, out);
    if (train->parsed()) return CmdTrain(tra, out);
    if (crossplay->parsed()) return CmdCrossplay(cro, out);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace rqelab
