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

#include "rqelab/rqe_gaussian.h"

#include <cmath>

#include "rqelab/io_util.h"

namespace rqelab {

namespace {

constexpr double kEigThreshold = 1e-10;
constexpr double kMaxCondition = 1e12;

Eigen::MatrixXd QuadBar(const QuadraticAggregativeGame& game) {
  Eigen::MatrixXd q(game.dim, game.dim);
  for (int i = 0; i < game.dim; ++i) {
    for (int j = 0; j < game.dim; ++j) {
      q(i, j) = -game.reward_quad[i * game.dim + j];
    }
  }
  return q;  // positive definite
}

Eigen::VectorXd LinTerm(const QuadraticAggregativeGame& game) {
  return Eigen::Map<const Eigen::VectorXd>(game.reward_lin.data(), game.dim);
}

bool IsPositiveDefinite(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff() > kEigThreshold;
}

Eigen::MatrixXd ClosedFormCovariance(const QuadraticAggregativeGame& game,
                                     int player, double eps_i) {
  Eigen::MatrixXd qbar = QuadBar(game);
  Eigen::MatrixXd own =
      game.rho[player] * Eigen::MatrixXd::Identity(game.dim, game.dim) + qbar;
  return eps_i * own.inverse();
}

// The aggregate reward couples every pair of opponents with -Qbar, so the
// risk tilt over the joint opponent action is computed on the full
// (N-1)n x (N-1)n system, not per-opponent blocks.
struct CoupledSystem {
  bool finite_risk = false;
  Eigen::MatrixXd own;        // coefficient of the player's own mean
  Eigen::MatrixXd cross;      // n x (N-1)n, applied to the stacked others
  Eigen::VectorXd constant;   // right-hand side of the first-order condition
};

CoupledSystem BuildCoupledSystem(const QuadraticAggregativeGame& game,
                                 int player, double tau,
                                 const std::vector<Eigen::MatrixXd>& other_prec) {
  int n = game.dim;
  int k = game.num_players - 1;
  Eigen::MatrixXd qbar = QuadBar(game);
  Eigen::VectorXd lin = LinTerm(game);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  CoupledSystem sys;
  sys.own = game.rho[player] * eye + qbar;
  sys.cross = Eigen::MatrixXd::Zero(n, k * n);
  sys.constant = lin;
  if (k == 0 || tau == 0.0) {
    // Risk-neutral: best response to the aggregate of the others' means.
    for (int j = 0; j < k; ++j) sys.cross.block(0, j * n, n, n) = qbar;
    sys.finite_risk = true;
    return sys;
  }
  Eigen::MatrixXd tilt = Eigen::MatrixXd::Zero(k * n, k * n);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      tilt.block(a * n, b * n, n, n) = -qbar;
      if (a == b) tilt.block(a * n, b * n, n, n) += other_prec[a] / tau;
    }
  }
  if (!IsPositiveDefinite(tilt)) return sys;  // risk diverges
  sys.finite_risk = true;
  Eigen::MatrixXd tilt_inv = tilt.inverse();
  Eigen::MatrixXd pair(n, k * n);  // H_{i,-i} = [-Qbar ... -Qbar]
  for (int j = 0; j < k; ++j) pair.block(0, j * n, n, n) = -qbar;
  sys.own += pair * tilt_inv * pair.transpose();
  Eigen::VectorXd lin_stack(k * n);
  for (int j = 0; j < k; ++j) lin_stack.segment(j * n, n) = lin;
  sys.constant = lin - pair * tilt_inv * lin_stack;
  Eigen::MatrixXd prec_stack = Eigen::MatrixXd::Zero(k * n, k * n);
  for (int j = 0; j < k; ++j) {
    prec_stack.block(j * n, j * n, n, n) = other_prec[j];
  }
  sys.cross = -pair * tilt_inv * prec_stack / tau;
  return sys;
}

void CheckProfile(const QuadraticAggregativeGame& game,
                  const RiskProfile& profile) {
  game.Validate();
  profile.Validate();
  if (static_cast<int>(profile.tau.size()) != game.num_players) {
    throw std::invalid_argument("profile size mismatch");
  }
}

}  // namespace

GaussianStrategy GaussianBestResponse(const QuadraticAggregativeGame& game,
                                      int player,
                                      const std::vector<GaussianStrategy>& others,
                                      double tau_i, double eps_i) {
  game.Validate();
  if (static_cast<int>(others.size()) != game.num_players - 1) {
    throw std::invalid_argument("expected one strategy per opponent");
  }
  if (!(eps_i > 0.0) || !(tau_i >= 0.0)) {
    throw std::invalid_argument("need eps > 0 and tau >= 0");
  }
  int n = game.dim;
  std::vector<Eigen::MatrixXd> other_prec;
  other_prec.reserve(others.size());
  for (const auto& o : others) other_prec.push_back(o.cov.inverse());
  CoupledSystem sys = BuildCoupledSystem(game, player, tau_i, other_prec);
  if (!sys.finite_risk) {
    throw InfiniteRiskError("risk is infinite: tilt system not positive definite");
  }
  // With tau > 0 the cross map already folds in (1/tau) Sigma_j^{-1}; at
  // tau = 0 it degenerates to the plain aggregate coupling; either way the
  // first-order condition is own * m = constant - cross * stacked_means.
  Eigen::VectorXd stacked(static_cast<int>(others.size()) * n);
  for (size_t j = 0; j < others.size(); ++j) {
    stacked.segment(static_cast<int>(j) * n, n) = others[j].mean;
  }
  GaussianStrategy response;
  response.cov = ClosedFormCovariance(game, player, eps_i);
  response.mean = sys.own.ldlt().solve(sys.constant - sys.cross * stacked);
  return response;
}

bool ValidityCondition(const QuadraticAggregativeGame& game,
                       const RiskProfile& profile) {
  CheckProfile(game, profile);
  for (int i = 0; i < game.num_players; ++i) {
    if (profile.tau[i] == 0.0) continue;  // 1/tau dominates
    std::vector<Eigen::MatrixXd> other_prec;
    for (int j = 0; j < game.num_players; ++j) {
      if (j == i) continue;
      other_prec.push_back(ClosedFormCovariance(game, j, profile.eps[j]).inverse());
    }
    CoupledSystem sys = BuildCoupledSystem(game, i, profile.tau[i], other_prec);
    if (!sys.finite_risk) return false;
  }
  return true;
}

GaussianRqeReport SolveGaussianRqe(const QuadraticAggregativeGame& game,
                                   const RiskProfile& profile) {
  CheckProfile(game, profile);
  if (!ValidityCondition(game, profile)) {
    throw InfiniteRiskError("validity condition violated: no finite-risk RQE");
  }
  int n = game.dim;
  int players = game.num_players;

  std::vector<Eigen::MatrixXd> cov(players), prec(players);
  for (int i = 0; i < players; ++i) {
    cov[i] = ClosedFormCovariance(game, i, profile.eps[i]);
    prec[i] = cov[i].inverse();
  }

  // Stacked first-order conditions F m = b of the surrogate game.
  Eigen::MatrixXd foc = Eigen::MatrixXd::Zero(players * n, players * n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(players * n);
  for (int i = 0; i < players; ++i) {
    std::vector<Eigen::MatrixXd> other_prec;
    std::vector<int> other_index;
    for (int j = 0; j < players; ++j) {
      if (j == i) continue;
      other_prec.push_back(prec[j]);
      other_index.push_back(j);
    }
    CoupledSystem sys = BuildCoupledSystem(game, i, profile.tau[i], other_prec);
    foc.block(i * n, i * n, n, n) = sys.own;
    for (size_t k = 0; k < other_index.size(); ++k) {
      foc.block(i * n, other_index[k] * n, n, n) =
          sys.cross.block(0, static_cast<int>(k) * n, n, n);
    }
    rhs.segment(i * n, n) = sys.constant;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(foc,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > kMaxCondition) {
    throw SingularSystemError("surrogate FOC system is numerically singular");
  }
  Eigen::VectorXd means = svd.solve(rhs);

  GaussianRqeReport report;
  report.valid = true;
  report.strategies.resize(players);
  for (int i = 0; i < players; ++i) {
    report.strategies[i].mean = means.segment(i * n, n);
    report.strategies[i].cov = cov[i];
  }
  report.shared_reward = ExpectedSharedReward(game, report.strategies);
  report.private_costs.resize(players);
  for (int i = 0; i < players; ++i) {
    report.private_costs[i] =
        ExpectedPrivateCost(game, i, report.strategies[i]);
  }
  return report;
}

double ExpectedSharedReward(const QuadraticAggregativeGame& game,
                            const std::vector<GaussianStrategy>& strategies) {
  int n = game.dim;
  Eigen::VectorXd m_tot = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd s_tot = Eigen::MatrixXd::Zero(n, n);
  for (const auto& strat : strategies) {
    m_tot += strat.mean;
    s_tot += strat.cov;
  }
  Eigen::MatrixXd quad(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) quad(i, j) = game.reward_quad[i * n + j];
  }
  Eigen::VectorXd lin = LinTerm(game);
  return 0.5 * (m_tot.dot(quad * m_tot) + (quad * s_tot).trace()) +
         lin.dot(m_tot) + game.RewardConstant();
}

double ExpectedPrivateCost(const QuadraticAggregativeGame& game, int player,
                           const GaussianStrategy& strategy) {
  return 0.5 * game.rho[player] *
         (strategy.mean.squaredNorm() + strategy.cov.trace());
}

std::vector<MonotonicityRow> MonotonicityScan(
    const QuadraticAggregativeGame& game, double eps,
    const std::vector<double>& tau_grid) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  std::vector<MonotonicityRow> rows;
  for (double tau : tau_grid) {
    MonotonicityRow row;
    row.tau = tau;
    RiskProfile profile = RiskProfile::Shared(game.num_players, tau, eps);
    if (!ValidityCondition(game, profile)) {
      rows.push_back(std::move(row));
      continue;
    }
    GaussianRqeReport report = SolveGaussianRqe(game, profile);
    row.valid = true;
    row.shared_reward = report.shared_reward;
    row.costs = report.private_costs;
    for (int i = 0; i < game.num_players; ++i) {
      row.utilities.push_back(report.shared_reward - report.private_costs[i]);
      for (int k = 0; k < game.dim; ++k) {
        row.means.push_back(report.strategies[i].mean[k]);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteMonotonicityCsv(std::ostream& os,
                          const QuadraticAggregativeGame& game,
                          const std::vector<MonotonicityRow>& rows,
                          std::uint64_t config_hash) {
  WriteCsvPreamble(os, config_hash);
  os << "tau,valid,J";
  for (int i = 0; i < game.num_players; ++i) os << ",cost_" << (i + 1);
  for (int i = 0; i < game.num_players; ++i) os << ",utility_" << (i + 1);
  for (int i = 0; i < game.num_players; ++i) {
    for (int k = 0; k < game.dim; ++k) {
      os << ",mean_" << (i + 1) << "_" << k;
    }
  }
  os << "\n";
  for (const auto& row : rows) {
    os << FormatDouble(row.tau) << "," << (row.valid ? "true" : "false");
    if (!row.valid) {
      os << ",";
      for (int i = 0; i < 2 * game.num_players; ++i) os << ",";
      for (int i = 0; i < game.num_players * game.dim; ++i) os << ",";
      os << "\n";
      continue;
    }
    os << "," << FormatDouble(row.shared_reward);
    for (double c : row.costs) os << "," << FormatDouble(c);
    for (double u : row.utilities) os << "," << FormatDouble(u);
    for (double m : row.means) os << "," << FormatDouble(m);
    os << "\n";
  }
}

}  // namespace rqelab
