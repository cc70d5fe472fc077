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
#include <sstream>

#include "rqelab/rng.h"
#include "test_oracles.h"
#include "testing.h"

namespace rqelab {
namespace {

QuadraticAggregativeGame RandomAggregativeGame(Rng& rng, int dim, int players) {
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = UniformIn(rng, -1.0, 1.0);
  }
  Eigen::MatrixXd qbar =
      a.transpose() * a + 0.3 * Eigen::MatrixXd::Identity(dim, dim);
  std::vector<double> quad_bar(dim * dim), a_bar(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) quad_bar[i * dim + j] = qbar(i, j);
    a_bar[i] = UniformIn(rng, -1.0, 1.0);
  }
  std::vector<double> rho(players, UniformIn(rng, 0.5, 2.0));
  return QuadraticAggregativeGame::FromTargetForm(quad_bar, a_bar, rho);
}

// The best-response objective over candidate means with the covariance held
// at its closed form: the log-partition expression obtained by integrating
// the Gaussian tilt (2-player case).
double DualObjective(const QuadraticAggregativeGame& game, int player,
                     const GaussianStrategy& opponent, double tau, double eps,
                     const Eigen::VectorXd& mean) {
  int n = game.dim;
  Eigen::MatrixXd qbar(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) qbar(i, j) = -game.reward_quad[i * n + j];
  }
  Eigen::VectorXd lin =
      Eigen::Map<const Eigen::VectorXd>(game.reward_lin.data(), n);
  Eigen::MatrixXd own_quad =
      game.rho[player] * Eigen::MatrixXd::Identity(n, n) + qbar;
  Eigen::MatrixXd cov_i = eps * own_quad.inverse();

  Eigen::MatrixXd opp_prec = opponent.cov.inverse();
  Eigen::MatrixXd tilt_prec = opp_prec - tau * qbar;  // Sigma_bar^{-1}
  Eigen::MatrixXd tilt_cov = tilt_prec.inverse();
  // H_{i,-i} = -qbar; the tilted mean collects the opponent prior and the
  // cross term with the candidate mean.
  Eigen::VectorXd tilted =
      tilt_cov * (opp_prec * opponent.mean - tau * (-qbar * mean + lin));
  double log_det_term =
      std::log((Eigen::MatrixXd::Identity(n, n) - tau * opponent.cov * qbar)
                   .determinant());
  double value = log_det_term / (2.0 * tau);
  value -= tilted.dot(tilt_prec * tilted) / (2.0 * tau);
  value += opponent.mean.dot(opp_prec * opponent.mean) / (2.0 * tau);
  value += 0.5 * (mean.dot(-own_quad * mean) - (own_quad * cov_i).trace());
  value += lin.dot(mean);
  // Gaussian differential entropy bonus; mean-independent but kept for
  // completeness.
  value += 0.5 * eps *
           std::log(std::pow(2.0 * M_PI * std::exp(1.0), n) *
                    cov_i.determinant());
  return value;
}

void TestExampleOneCovariance() {
  QuadraticAggregativeGame game = MakeExampleForceGame(1.0);
  for (double tau : {1e-6, 0.3, 1.5}) {
    for (double eps : {0.2, 1.0}) {
      RiskProfile profile = RiskProfile::Shared(2, tau, eps);
      GaussianRqeReport report = SolveGaussianRqe(game, profile);
      RQE_CHECK(report.valid);
      for (const auto& strat : report.strategies) {
        RQE_CHECK_NEAR(strat.cov(0, 0), eps / 2.0, 1e-14);
      }
    }
  }
}

void TestValidityCondition() {
  QuadraticAggregativeGame game = MakeExampleForceGame(1.0);
  // Scalar condition reduces to tau * eps < 2.
  RQE_CHECK(ValidityCondition(game, RiskProfile::Shared(2, 1.9, 1.0)));
  RQE_CHECK(!ValidityCondition(game, RiskProfile::Shared(2, 2.5, 1.0)));
  RQE_CHECK(!ValidityCondition(game, RiskProfile::Shared(2, 2.0, 1.0)));
  RQE_CHECK(ValidityCondition(game, RiskProfile::Shared(2, 1e-9, 1.0)));
  RQE_CHECK(ValidityCondition(game, RiskProfile::Shared(2, 0.0, 1.0)));
  RQE_CHECK_THROWS(SolveGaussianRqe(game, RiskProfile::Shared(2, 2.5, 1.0)),
                   InfiniteRiskError);
}

void TestRiskNeutralLimit() {
  QuadraticAggregativeGame game = MakeExampleForceGame(1.0);
  RiskProfile tiny = RiskProfile::Shared(2, 1e-8, 1.0);
  GaussianRqeReport report = SolveGaussianRqe(game, tiny);
  RQE_CHECK_NEAR(report.strategies[0].mean[0], 1.0 / 3.0, 1e-7);
  RQE_CHECK_NEAR(report.strategies[1].mean[0], 1.0 / 3.0, 1e-7);
  // The tau = 0 sentinel gives the risk-neutral equilibrium exactly.
  GaussianRqeReport neutral = SolveGaussianRqe(game, RiskProfile::Shared(2, 0.0, 1.0));
  RQE_CHECK_NEAR(neutral.strategies[0].mean[0], 1.0 / 3.0, 1e-12);

  // Risk-neutral best response against a fixed opponent.
  GaussianStrategy opp;
  opp.mean = Eigen::VectorXd::Constant(1, 0.25);
  opp.cov = Eigen::MatrixXd::Constant(1, 1, 0.5);
  GaussianStrategy b0 = GaussianBestResponse(game, 0, {opp}, 0.0, 1.0);
  GaussianStrategy b8 = GaussianBestResponse(game, 0, {opp}, 1e-8, 1.0);
  // (rho + 1) m = abar - m_opp.
  RQE_CHECK_NEAR(b0.mean[0], (1.0 - 0.25) / 2.0, 1e-12);
  RQE_CHECK_NEAR(b8.mean[0], b0.mean[0], 1e-7);
}

void TestBestResponseAgainstGridOracle() {
  Rng rng(61);
  QuadraticAggregativeGame game = RandomAggregativeGame(rng, 2, 2);
  double tau = 0.3;
  double eps = 0.7;
  GaussianStrategy opp;
  opp.mean = Eigen::VectorXd::Zero(2);
  opp.mean << UniformIn(rng, -0.5, 0.5), UniformIn(rng, -0.5, 0.5);
  Eigen::MatrixXd qbar(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) qbar(i, j) = -game.reward_quad[i * 2 + j];
  }
  opp.cov = eps * (game.rho[1] * Eigen::MatrixXd::Identity(2, 2) + qbar).inverse();

  GaussianStrategy response = GaussianBestResponse(game, 0, {opp}, tau, eps);
  // Grid search around the candidate; the boundary check guards against a
  // maximizer outside the window.
  double window = 0.2;
  double step = 4e-4;
  Eigen::VectorXd best = response.mean;
  double best_f = -1e300;
  int half = static_cast<int>(window / step);
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      Eigen::VectorXd m = response.mean;
      m[0] += i * step;
      m[1] += j * step;
      double f = DualObjective(game, 0, opp, tau, eps, m);
      if (f > best_f) {
        best_f = f;
        best = m;
      }
    }
  }
  RQE_CHECK((best - response.mean).cwiseAbs().maxCoeff() < window - step);
  RQE_CHECK_NEAR(best[0], response.mean[0], 1e-3);
  RQE_CHECK_NEAR(best[1], response.mean[1], 1e-3);
}

void TestSolveMatchesIterationOracle() {
  Rng rng(67);
  // Example 1 over a tau range plus random games.
  for (int trial = 0; trial < 20; ++trial) {
    QuadraticAggregativeGame game =
        trial == 0 ? MakeExampleForceGame(1.0)
                   : RandomAggregativeGame(rng, 1 + UniformInt(rng, 3),
                                           2 + UniformInt(rng, 2));
    double eps = UniformIn(rng, 0.3, 1.5);
    double tau = UniformIn(rng, 0.05, 1.0);
    RiskProfile profile = RiskProfile::Shared(game.num_players, tau, eps);
    if (!ValidityCondition(game, profile)) continue;
    GaussianRqeReport solved = SolveGaussianRqe(game, profile);
    auto iterated = testing_oracles::GaussianBestResponseIteration(game, profile);
    for (int i = 0; i < game.num_players; ++i) {
      RQE_CHECK((solved.strategies[i].mean - iterated[i].mean)
                    .lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }
}

void TestFixedPointCertificate() {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    QuadraticAggregativeGame game =
        RandomAggregativeGame(rng, 1 + UniformInt(rng, 2), 2 + UniformInt(rng, 2));
    RiskProfile profile =
        RiskProfile::Shared(game.num_players, UniformIn(rng, 0.05, 0.5),
                            UniformIn(rng, 0.3, 1.2));
    if (!ValidityCondition(game, profile)) continue;
    GaussianRqeReport report = SolveGaussianRqe(game, profile);
    for (int i = 0; i < game.num_players; ++i) {
      std::vector<GaussianStrategy> others;
      for (int j = 0; j < game.num_players; ++j) {
        if (j != i) others.push_back(report.strategies[j]);
      }
      GaussianStrategy response =
          GaussianBestResponse(game, i, others, profile.tau[i], profile.eps[i]);
      RQE_CHECK((response.mean - report.strategies[i].mean)
                    .lpNorm<Eigen::Infinity>() < 1e-8);
      RQE_CHECK((response.cov - report.strategies[i].cov)
                    .lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
}

void TestCovarianceTauIndependent() {
  Rng rng(73);
  QuadraticAggregativeGame game = RandomAggregativeGame(rng, 2, 2);
  RiskProfile a = RiskProfile::Shared(2, 0.05, 0.8);
  RiskProfile b = RiskProfile::Shared(2, 0.4, 0.8);
  GaussianRqeReport ra = SolveGaussianRqe(game, a);
  GaussianRqeReport rb = SolveGaussianRqe(game, b);
  RQE_CHECK((ra.strategies[0].cov - rb.strategies[0].cov)
                .lpNorm<Eigen::Infinity>() == 0.0);
}

void TestSymmetricPlayersEqualMeans() {
  Rng rng(79);
  QuadraticAggregativeGame game = RandomAggregativeGame(rng, 2, 3);
  RiskProfile profile = RiskProfile::Shared(3, 0.2, 0.9);
  RQE_CHECK(ValidityCondition(game, profile));
  GaussianRqeReport report = SolveGaussianRqe(game, profile);
  for (int i = 1; i < 3; ++i) {
    RQE_CHECK((report.strategies[i].mean - report.strategies[0].mean)
                  .lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

void TestExpectedSharedReward() {
  // Degenerate point masses at zero: (H, h) form gives 0, the target form
  // restores its constant.
  QuadraticAggregativeGame game = MakeExampleForceGame(1.0);
  std::vector<GaussianStrategy> degenerate(2);
  for (auto& s : degenerate) {
    s.mean = Eigen::VectorXd::Zero(1);
    s.cov = Eigen::MatrixXd::Constant(1, 1, 1e-14);
  }
  RQE_CHECK_NEAR(ExpectedSharedReward(game, degenerate), -0.5, 1e-12);
  QuadraticAggregativeGame plain = game;
  plain.target.reset();
  RQE_CHECK_NEAR(ExpectedSharedReward(plain, degenerate), 0.0, 1e-12);

  // Example 1 closed form at the solved equilibrium.
  double eps = 1.0, tau = 0.8;
  GaussianRqeReport report =
      SolveGaussianRqe(game, RiskProfile::Shared(2, tau, eps));
  double m = report.strategies[0].mean[0];
  RQE_CHECK_NEAR(report.shared_reward,
                 -0.5 * ((2 * m - 1.0) * (2 * m - 1.0) + 2 * (eps / 2.0)),
                 1e-12);
  // The surrogate-game fixed point lands on abar / (3 - tau eps / 2).
  RQE_CHECK_NEAR(m, 1.0 / (3.0 - tau * eps / 2.0), 1e-10);
}

void TestExpectedSharedRewardMonteCarlo() {
  Rng rng(83);
  QuadraticAggregativeGame game = RandomAggregativeGame(rng, 2, 2);
  RiskProfile profile = RiskProfile::Shared(2, 0.2, 0.8);
  GaussianRqeReport report = SolveGaussianRqe(game, profile);
  double closed = ExpectedSharedReward(game, report.strategies);

  std::vector<Eigen::MatrixXd> chol;
  for (const auto& s : report.strategies) {
    chol.push_back(Eigen::MatrixXd(s.cov.llt().matrixL()));
  }
  const int kSamples = 1000000;
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < 2; ++i) {
      double u1 = std::max(UniformDouble(rng), 1e-300);
      double u2 = UniformDouble(rng);
      double r = std::sqrt(-2.0 * std::log(u1));
      Eigen::VectorXd z(2);
      z << r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2);
      total += report.strategies[i].mean + chol[i] * z;
    }
    double reward = game.RewardConstant();
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        reward += 0.5 * total[i] * game.reward_quad[i * 2 + j] * total[j];
      }
      reward += game.reward_lin[i] * total[i];
    }
    double delta = reward - mean;
    mean += delta / (k + 1);
    m2 += delta * (reward - mean);
  }
  double se = std::sqrt(m2 / (kSamples - 1) / kSamples);
  RQE_CHECK_MSG(std::abs(closed - mean) < 3.0 * se,
                "closed=" << closed << " mc=" << mean << " se=" << se);
}

void TestMonotonicityScan() {
  QuadraticAggregativeGame game = MakeExampleForceGame(1.0);
  std::vector<double> grid;
  for (double tau = 0.01; tau <= 1.9 + 1e-9; tau += 0.05) grid.push_back(tau);
  auto rows = MonotonicityScan(game, 1.0, grid);
  double prev = -kDivergenceInfinity;
  double first_utility = 0.0;
  bool exceeded = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    RQE_CHECK(rows[i].valid);
    RQE_CHECK(rows[i].shared_reward - prev > -1e-10);
    prev = rows[i].shared_reward;
    if (i == 0) first_utility = rows[i].utilities[0];
    if (rows[i].utilities[0] > first_utility + 1e-6) exceeded = true;
  }
  RQE_CHECK(exceeded);

  // Past the validity boundary rows are flagged, not fatal.
  auto over = MonotonicityScan(game, 1.0, {1.0, 2.5});
  RQE_CHECK(over[0].valid);
  RQE_CHECK(!over[1].valid);

  // Random games with player-shared parameters stay monotone on the valid
  // prefix of the grid.
  Rng rng(89);
  for (int trial = 0; trial < 20; ++trial) {
    QuadraticAggregativeGame random_game =
        RandomAggregativeGame(rng, 1 + UniformInt(rng, 3), 2 + UniformInt(rng, 2));
    double eps = UniformIn(rng, 0.3, 1.2);
    std::vector<double> tau_grid;
    for (double tau = 0.02; tau <= 3.0; tau += 0.1) tau_grid.push_back(tau);
    auto random_rows = MonotonicityScan(random_game, eps, tau_grid);
    double last = -kDivergenceInfinity;
    for (const auto& row : random_rows) {
      if (!row.valid) continue;
      RQE_CHECK_MSG(row.shared_reward - last > -1e-10,
                    "J dropped at tau=" << row.tau);
      last = row.shared_reward;
    }
  }

  std::ostringstream csv;
  WriteMonotonicityCsv(csv, game, rows, 0x99);
  RQE_CHECK(csv.str().find("tau,valid,J,cost_1,cost_2,utility_1,utility_2") !=
            std::string::npos);
}

}  // namespace
}  // namespace rqelab

int main() {
  rqelab::TestExampleOneCovariance();
  rqelab::TestValidityCondition();
  rqelab::TestRiskNeutralLimit();
  rqelab::TestBestResponseAgainstGridOracle();
  rqelab::TestSolveMatchesIterationOracle();
  rqelab::TestFixedPointCertificate();
  rqelab::TestCovarianceTauIndependent();
  rqelab::TestSymmetricPlayersEqualMeans();
  rqelab::TestExpectedSharedReward();
  rqelab::TestExpectedSharedRewardMonteCarlo();
  rqelab::TestMonotonicityScan();
  std::cout << "rqe_gaussian_test: OK" << std::endl;
  return 0;
}
