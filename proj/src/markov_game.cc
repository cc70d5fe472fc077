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

#include "rqelab/markov_game.h"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

#include "rqelab/io_util.h"
#include "rqelab/risk.h"
#include "rqelab/rng.h"

namespace rqelab {

namespace {

void CheckPlayer(int player) {
  if (player != 0 && player != 1) throw std::out_of_range("player index");
}

void CheckTau(const RiskProfile& profile, int player) {
  if (!(profile.tau[player] > 0.0)) {
    throw std::invalid_argument("markov-game evaluation needs tau > 0");
  }
}

// Joint action weight at state s under player i's behavior pair
// (a1, a2) ~ (pi_i, p_i) arranged into env slots.
double JointWeight(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                   int player, int s, int a1, int a2) {
  if (player == 0) {
    return pols.PiRow(mg, 0, s)[a1] * pols.AdvRow(mg, 0, s)[a2];
  }
  return pols.AdvRow(mg, 1, s)[a1] * pols.PiRow(mg, 1, s)[a2];
}

// Induced state chain P(s'|s) under player i's behavior pair.
Eigen::MatrixXd InducedChain(const TabularMarkovGame& mg,
                             const TabularPolicyPair& pols, int player) {
  int S = mg.num_states;
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    for (int a1 = 0; a1 < mg.num_actions[0]; ++a1) {
      for (int a2 = 0; a2 < mg.num_actions[1]; ++a2) {
        double w = JointWeight(mg, pols, player, s, a1, a2);
        if (w == 0.0) continue;
        const double* row = &mg.transition[mg.JointIndex(s, a1, a2) * S];
        for (int sp = 0; sp < S; ++sp) chain(s, sp) += w * row[sp];
      }
    }
  }
  return chain;
}

// Per-state regularizer (1/tau) KL(p_i, pi_{-i}) - eps H(pi_i); returns
// false when the KL is infinite at some state.
bool StateRegularizer(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                      int player, const RiskProfile& profile,
                      std::vector<double>* out) {
  int S = mg.num_states;
  out->assign(S, 0.0);
  for (int s = 0; s < S; ++s) {
    double kl = KlDivergence(pols.AdvRow(mg, player, s),
                             pols.PiRow(mg, 1 - player, s));
    if (kl == kDivergenceInfinity) return false;
    (*out)[s] = kl / profile.tau[player] -
                profile.eps[player] * NegEntropy(pols.PiRow(mg, player, s));
  }
  return true;
}

std::vector<double> PointMassState(int num_states, int s0) {
  std::vector<double> d(num_states, 0.0);
  d[s0] = 1.0;
  return d;
}

}  // namespace

void TabularMarkovGame::Validate() const {
  if (num_states <= 0 || num_actions[0] <= 0 || num_actions[1] <= 0) {
    throw std::invalid_argument("bad markov game shape");
  }
  size_t joints = static_cast<size_t>(num_states) * num_actions[0] * num_actions[1];
  if (transition.size() != joints * num_states) {
    throw std::invalid_argument("transition shape mismatch");
  }
  for (size_t j = 0; j < joints; ++j) {
    double total = 0.0;
    for (int sp = 0; sp < num_states; ++sp) {
      double p = transition[j * num_states + sp];
      if (!(p >= 0.0)) throw std::invalid_argument("negative transition prob");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("transition row does not sum to 1");
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (rewards[i].size() != joints) {
      throw std::invalid_argument("reward shape mismatch");
    }
    for (double r : rewards[i]) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw std::invalid_argument("rewards must lie in [0, 1]");
      }
    }
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must be in [0, 1)");
  }
  if (rho0.size() != static_cast<size_t>(num_states) || !IsDistribution(rho0)) {
    throw std::invalid_argument("rho0 must be a distribution over states");
  }
}

void TabularPolicyPair::Validate(const TabularMarkovGame& mg) const {
  for (int i = 0; i < 2; ++i) {
    if (pi[i].size() != static_cast<size_t>(mg.num_states) * mg.num_actions[i] ||
        adv[i].size() !=
            static_cast<size_t>(mg.num_states) * mg.num_actions[1 - i]) {
      throw std::invalid_argument("policy table shape mismatch");
    }
    for (int s = 0; s < mg.num_states; ++s) {
      if (!IsDistribution(PiRow(mg, i, s), 1e-9) ||
          !IsDistribution(AdvRow(mg, i, s), 1e-9)) {
        throw std::invalid_argument("policy row is not a distribution");
      }
    }
  }
}

ValueResult RiskAdjustedValue(const TabularMarkovGame& mg,
                              const TabularPolicyPair& pols, int player,
                              const RiskProfile& profile) {
  CheckPlayer(player);
  CheckTau(profile, player);
  int S = mg.num_states;
  ValueResult result;
  std::vector<double> reg;
  if (!StateRegularizer(mg, pols, player, profile, &reg)) {
    result.ok = false;
    result.value.assign(S, kDivergenceInfinity);
    return result;
  }
  Eigen::VectorXd rbar(S);
  for (int s = 0; s < S; ++s) {
    double acc = 0.0;
    for (int a1 = 0; a1 < mg.num_actions[0]; ++a1) {
      for (int a2 = 0; a2 < mg.num_actions[1]; ++a2) {
        acc += JointWeight(mg, pols, player, s, a1, a2) *
               mg.rewards[player][mg.JointIndex(s, a1, a2)];
      }
    }
    rbar[s] = acc + reg[s];
  }
  Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - mg.gamma * InducedChain(mg, pols, player);
  Eigen::VectorXd v = system.partialPivLu().solve(rbar);
  result.value.assign(v.data(), v.data() + S);
  return result;
}

QResult QFunction(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                  int player, const RiskProfile& profile) {
  ValueResult vr = RiskAdjustedValue(mg, pols, player, profile);
  QResult result;
  result.ok = vr.ok;
  int S = mg.num_states;
  size_t joints = static_cast<size_t>(S) * mg.num_actions[0] * mg.num_actions[1];
  result.q.assign(joints, vr.ok ? 0.0 : kDivergenceInfinity);
  if (!vr.ok) return result;
  for (int s = 0; s < S; ++s) {
    for (int a1 = 0; a1 < mg.num_actions[0]; ++a1) {
      for (int a2 = 0; a2 < mg.num_actions[1]; ++a2) {
        int j = mg.JointIndex(s, a1, a2);
        double next = 0.0;
        const double* row = &mg.transition[static_cast<size_t>(j) * S];
        for (int sp = 0; sp < S; ++sp) next += row[sp] * vr.value[sp];
        result.q[j] = mg.rewards[player][j] + mg.gamma * next;
      }
    }
  }
  return result;
}

std::vector<double> DiscountedVisitation(const TabularMarkovGame& mg,
                                         const TabularPolicyPair& pols,
                                         int player,
                                         std::span<const double> start) {
  CheckPlayer(player);
  int S = mg.num_states;
  Eigen::MatrixXd chain = InducedChain(mg, pols, player);
  Eigen::MatrixXd system =
      (Eigen::MatrixXd::Identity(S, S) - mg.gamma * chain).transpose();
  Eigen::VectorXd rhs(S);
  for (int s = 0; s < S; ++s) rhs[s] = (1.0 - mg.gamma) * start[s];
  Eigen::VectorXd d = system.partialPivLu().solve(rhs);
  return std::vector<double>(d.data(), d.data() + S);
}

std::vector<double> DiscountedVisitation(const TabularMarkovGame& mg,
                                         const TabularPolicyPair& pols,
                                         int player, int s0) {
  return DiscountedVisitation(mg, pols, player,
                              PointMassState(mg.num_states, s0));
}

std::vector<double> PolicyGradientPi(const TabularMarkovGame& mg,
                                     const TabularPolicyPair& pols, int player,
                                     const RiskProfile& profile,
                                     std::span<const double> start) {
  QResult qr = QFunction(mg, pols, player, profile);
  if (!qr.ok) throw std::invalid_argument("adversary support violation");
  int S = mg.num_states;
  int own_n = mg.num_actions[player];
  int opp_n = mg.num_actions[1 - player];
  std::vector<double> d = DiscountedVisitation(mg, pols, player, start);
  std::vector<double> grad(static_cast<size_t>(S) * own_n, 0.0);
  for (int s = 0; s < S; ++s) {
    auto own = pols.PiRow(mg, player, s);
    auto opp = pols.AdvRow(mg, player, s);
    // coef(a) = E_{opponent}[Q] - eps (log pi(a) + 1).
    std::vector<double> coef(own_n);
    for (int a = 0; a < own_n; ++a) {
      double qbar = 0.0;
      for (int b = 0; b < opp_n; ++b) {
        int j = player == 0 ? mg.JointIndex(s, a, b) : mg.JointIndex(s, b, a);
        qbar += opp[b] * qr.q[j];
      }
      coef[a] = qbar - profile.eps[player] *
                           (std::log(std::max(own[a], kProbFloor)) + 1.0);
    }
    double mean = 0.0;
    for (int a = 0; a < own_n; ++a) mean += own[a] * coef[a];
    double scale = d[s] / (1.0 - mg.gamma);
    for (int a = 0; a < own_n; ++a) {
      grad[s * own_n + a] = scale * own[a] * (coef[a] - mean);
    }
  }
  return grad;
}

std::vector<double> PolicyGradientP(const TabularMarkovGame& mg,
                                    const TabularPolicyPair& pols, int player,
                                    const RiskProfile& profile,
                                    std::span<const double> start) {
  QResult qr = QFunction(mg, pols, player, profile);
  if (!qr.ok) throw std::invalid_argument("adversary support violation");
  int S = mg.num_states;
  int own_n = mg.num_actions[player];
  int opp_n = mg.num_actions[1 - player];
  std::vector<double> d = DiscountedVisitation(mg, pols, player, start);
  std::vector<double> grad(static_cast<size_t>(S) * opp_n, 0.0);
  for (int s = 0; s < S; ++s) {
    auto own = pols.PiRow(mg, player, s);
    auto adv = pols.AdvRow(mg, player, s);
    auto anchor = pols.PiRow(mg, 1 - player, s);
    // coef(b) = E_{own}[Q] + (1/tau)(log(p(b)/pi_opp(b)) + 1).
    std::vector<double> coef(opp_n);
    for (int b = 0; b < opp_n; ++b) {
      double qtil = 0.0;
      for (int a = 0; a < own_n; ++a) {
        int j = player == 0 ? mg.JointIndex(s, a, b) : mg.JointIndex(s, b, a);
        qtil += own[a] * qr.q[j];
      }
      double ratio = std::log(std::max(adv[b], kProbFloor)) -
                     std::log(std::max(anchor[b], kProbFloor));
      coef[b] = qtil + (ratio + 1.0) / profile.tau[player];
    }
    double mean = 0.0;
    for (int b = 0; b < opp_n; ++b) mean += adv[b] * coef[b];
    double scale = d[s] / (1.0 - mg.gamma);
    for (int b = 0; b < opp_n; ++b) {
      grad[s * opp_n + b] = scale * adv[b] * (coef[b] - mean);
    }
  }
  return grad;
}

double PdlCheckPi(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                  int player, const RiskProfile& profile,
                  const std::vector<double>& pi_alt) {
  CheckPlayer(player);
  TabularPolicyPair primed = pols;
  primed.pi[player] = pi_alt;
  ValueResult v_new = RiskAdjustedValue(mg, pols, player, profile);
  ValueResult v_old = RiskAdjustedValue(mg, primed, player, profile);
  QResult q_old = QFunction(mg, primed, player, profile);
  if (!v_new.ok || !v_old.ok || !q_old.ok) {
    throw std::invalid_argument("adversary support violation");
  }
  int S = mg.num_states;
  std::vector<double> reg_kl(S);
  for (int s = 0; s < S; ++s) {
    reg_kl[s] = KlDivergence(pols.AdvRow(mg, player, s),
                             pols.PiRow(mg, 1 - player, s)) /
                profile.tau[player];
  }
  double worst = 0.0;
  for (int s0 = 0; s0 < S; ++s0) {
    std::vector<double> d = DiscountedVisitation(mg, pols, player, s0);
    double rhs = 0.0;
    for (int s = 0; s < S; ++s) {
      double inner = 0.0;
      for (int a1 = 0; a1 < mg.num_actions[0]; ++a1) {
        for (int a2 = 0; a2 < mg.num_actions[1]; ++a2) {
          double w = JointWeight(mg, pols, player, s, a1, a2);
          if (w == 0.0) continue;
          double adv_val =
              q_old.q[mg.JointIndex(s, a1, a2)] - v_old.value[s] + reg_kl[s];
          inner += w * adv_val;
        }
      }
      inner -= profile.eps[player] * NegEntropy(pols.PiRow(mg, player, s));
      rhs += d[s] * inner;
    }
    rhs /= (1.0 - mg.gamma);
    double lhs = v_new.value[s0] - v_old.value[s0];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double PdlCheckP(const TabularMarkovGame& mg, const TabularPolicyPair& pols,
                 int player, const RiskProfile& profile,
                 const std::vector<double>& p_alt) {
  CheckPlayer(player);
  TabularPolicyPair primed = pols;
  primed.adv[player] = p_alt;
  ValueResult v_new = RiskAdjustedValue(mg, pols, player, profile);
  ValueResult v_old = RiskAdjustedValue(mg, primed, player, profile);
  QResult q_old = QFunction(mg, primed, player, profile);
  if (!v_new.ok || !v_old.ok || !q_old.ok) {
    throw std::invalid_argument("adversary support violation");
  }
  int S = mg.num_states;
  double worst = 0.0;
  for (int s0 = 0; s0 < S; ++s0) {
    std::vector<double> d = DiscountedVisitation(mg, pols, player, s0);
    double rhs = 0.0;
    for (int s = 0; s < S; ++s) {
      double ent = profile.eps[player] * NegEntropy(pols.PiRow(mg, player, s));
      double kl_new = KlDivergence(pols.AdvRow(mg, player, s),
                                   pols.PiRow(mg, 1 - player, s)) /
                      profile.tau[player];
      double inner = 0.0;
      for (int a1 = 0; a1 < mg.num_actions[0]; ++a1) {
        for (int a2 = 0; a2 < mg.num_actions[1]; ++a2) {
          double w = JointWeight(mg, pols, player, s, a1, a2);
          if (w == 0.0) continue;
          double adv_val =
              q_old.q[mg.JointIndex(s, a1, a2)] - v_old.value[s] - ent;
          inner += w * adv_val;
        }
      }
      inner += kl_new;
      rhs += d[s] * inner;
    }
    rhs /= (1.0 - mg.gamma);
    double lhs = v_new.value[s0] - v_old.value[s0];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

TabularMarkovGame RandomMarkovGame(std::uint64_t seed, int max_states,
                                   int max_actions, double max_gamma) {
  Rng rng(seed);
  TabularMarkovGame mg;
  mg.num_states = 2 + UniformInt(rng, max_states - 1);
  mg.num_actions[0] = 2 + UniformInt(rng, max_actions - 1);
  mg.num_actions[1] = 2 + UniformInt(rng, max_actions - 1);
  int S = mg.num_states;
  size_t joints = static_cast<size_t>(S) * mg.num_actions[0] * mg.num_actions[1];
  mg.transition.resize(joints * S);
  for (size_t j = 0; j < joints; ++j) {
    std::vector<double> row = SampleSimplexUniform(rng, S);
    for (int sp = 0; sp < S; ++sp) mg.transition[j * S + sp] = row[sp];
  }
  for (int i = 0; i < 2; ++i) {
    mg.rewards[i].resize(joints);
    for (auto& r : mg.rewards[i]) r = UniformDouble(rng);
  }
  mg.gamma = UniformIn(rng, 0.3, max_gamma);
  mg.rho0 = SampleSimplexUniform(rng, S);
  mg.Validate();
  return mg;
}

TabularPolicyPair RandomPolicyPair(const TabularMarkovGame& mg,
                                   std::uint64_t seed) {
  Rng rng(seed);
  TabularPolicyPair pols;
  auto random_rows = [&rng](int states, int actions) {
    std::vector<double> rows(static_cast<size_t>(states) * actions);
    for (int s = 0; s < states; ++s) {
      std::vector<double> logits(actions);
      for (auto& l : logits) l = UniformIn(rng, -1.0, 1.0);
      MixedStrategy p = Softmax(logits);
      for (int a = 0; a < actions; ++a) rows[s * actions + a] = p[a];
    }
    return rows;
  };
  for (int i = 0; i < 2; ++i) {
    pols.pi[i] = random_rows(mg.num_states, mg.num_actions[i]);
    pols.adv[i] = random_rows(mg.num_states, mg.num_actions[1 - i]);
  }
  pols.Validate(mg);
  return pols;
}

namespace {

// Central finite differences of E_{rho0}[V] through the softmax
// reparametrization of one policy table.
std::vector<double> FiniteDifferenceGradient(
    const TabularMarkovGame& mg, const TabularPolicyPair& pols, int player,
    const RiskProfile& profile, bool adversary_side, double h = 1e-6) {
  int rows = mg.num_states;
  int cols = adversary_side ? mg.num_actions[1 - player] : mg.num_actions[player];
  const std::vector<double>& table =
      adversary_side ? pols.adv[player] : pols.pi[player];
  // Recover logits from probabilities (log p is one valid gauge).
  std::vector<double> logits(table.size());
  for (size_t k = 0; k < table.size(); ++k) {
    logits[k] = std::log(std::max(table[k], kProbFloor));
  }
  auto objective = [&](const std::vector<double>& theta) {
    TabularPolicyPair shifted = pols;
    std::vector<double>& target =
        adversary_side ? shifted.adv[player] : shifted.pi[player];
    for (int s = 0; s < rows; ++s) {
      MixedStrategy p = Softmax(
          std::span<const double>(theta).subspan(s * cols, cols));
      for (int a = 0; a < cols; ++a) target[s * cols + a] = p[a];
    }
    ValueResult vr = RiskAdjustedValue(mg, shifted, player, profile);
    double j = 0.0;
    for (int s = 0; s < mg.num_states; ++s) j += mg.rho0[s] * vr.value[s];
    return j;
  };
  std::vector<double> grad(table.size());
  for (size_t k = 0; k < logits.size(); ++k) {
    std::vector<double> plus = logits;
    std::vector<double> minus = logits;
    plus[k] += h;
    minus[k] -= h;
    grad[k] = (objective(plus) - objective(minus)) / (2.0 * h);
  }
  return grad;
}

double RelativeError(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a[k] - b[k]));
    scale = std::max(scale, std::abs(b[k]));
  }
  return diff / std::max(scale, 1e-12);
}

}  // namespace

VerifyReport RunGradientVerification(int n_instances, std::uint64_t seed,
                                     double rel_tol, double pdl_tol,
                                     bool inject_sign_flip) {
  VerifyReport report;
  report.pass = true;
  for (int k = 0; k < n_instances; ++k) {
    std::uint64_t inst_seed = DeriveSeed(seed, k);
    TabularMarkovGame mg = RandomMarkovGame(inst_seed);
    TabularPolicyPair pols = RandomPolicyPair(mg, DeriveSeed(inst_seed, 1));
    Rng rng(DeriveSeed(inst_seed, 2));
    RiskProfile profile;
    profile.tau = {UniformIn(rng, 0.5, 2.0), UniformIn(rng, 0.5, 2.0)};
    profile.eps = {UniformIn(rng, 0.05, 0.5), UniformIn(rng, 0.05, 0.5)};

    GradientCheck check;
    check.instance_seed = inst_seed;
    for (int player = 0; player < 2; ++player) {
      std::vector<double> analytic_pi =
          PolicyGradientPi(mg, pols, player, profile, mg.rho0);
      if (inject_sign_flip && !analytic_pi.empty()) {
        analytic_pi[0] = -analytic_pi[0] - 1.0;
      }
      std::vector<double> fd_pi =
          FiniteDifferenceGradient(mg, pols, player, profile, false);
      check.rel_err_pi =
          std::max(check.rel_err_pi, RelativeError(analytic_pi, fd_pi));

      std::vector<double> analytic_p =
          PolicyGradientP(mg, pols, player, profile, mg.rho0);
      std::vector<double> fd_p =
          FiniteDifferenceGradient(mg, pols, player, profile, true);
      check.rel_err_p =
          std::max(check.rel_err_p, RelativeError(analytic_p, fd_p));

      TabularPolicyPair alt =
          RandomPolicyPair(mg, DeriveSeed(inst_seed, 3 + player));
      check.pdl_residual_pi = std::max(
          check.pdl_residual_pi,
          PdlCheckPi(mg, pols, player, profile, alt.pi[player]));
      check.pdl_residual_p = std::max(
          check.pdl_residual_p,
          PdlCheckP(mg, pols, player, profile, alt.adv[player]));
    }
    check.pass = check.rel_err_pi < rel_tol && check.rel_err_p < rel_tol &&
                 check.pdl_residual_pi < pdl_tol &&
                 check.pdl_residual_p < pdl_tol;
    report.max_rel_err_pi = std::max(report.max_rel_err_pi, check.rel_err_pi);
    report.max_rel_err_p = std::max(report.max_rel_err_p, check.rel_err_p);
    report.max_pdl_residual_pi =
        std::max(report.max_pdl_residual_pi, check.pdl_residual_pi);
    report.max_pdl_residual_p =
        std::max(report.max_pdl_residual_p, check.pdl_residual_p);
    report.pass = report.pass && check.pass;
    report.checks.push_back(check);
  }
  return report;
}

std::string VerifyReportToJson(const VerifyReport& report) {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["pass"] = report.pass;
  j["max_rel_err_policy_gradient"] = report.max_rel_err_pi;
  j["max_rel_err_adversary_gradient"] = report.max_rel_err_p;
  j["max_pdl_residual_policy"] = report.max_pdl_residual_pi;
  j["max_pdl_residual_adversary"] = report.max_pdl_residual_p;
  j["instances"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json jc;
    jc["seed"] = c.instance_seed;
    jc["rel_err_policy_gradient"] = c.rel_err_pi;
    jc["rel_err_adversary_gradient"] = c.rel_err_p;
    jc["pdl_residual_policy"] = c.pdl_residual_pi;
    jc["pdl_residual_adversary"] = c.pdl_residual_p;
    jc["pass"] = c.pass;
    j["instances"].push_back(jc);
  }
  return j.dump(2);
}

}  // namespace rqelab
