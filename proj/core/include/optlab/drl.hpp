#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "optlab/types.hpp"

namespace optlab {

// Sign-flip action on the reflector: diagonal of +-1. Encoded id maps -1 to
// bit 1 and +1 to bit 0, first element most significant, plus one; the
// identity (all +1) is id 1.
std::uint32_t encode_action(const std::vector<int>& signs);
std::vector<int> decode_action(std::uint32_t id, int n);

struct ActionSpace {
  int n = 0;                         // reflector elements per action
  std::vector<std::uint32_t> ids;    // ascending id order; identity included
  std::vector<std::vector<int>> signs;

  int index_of(std::uint32_t id) const;  // -1 if absent
  int identity_index() const;
};

// Frequency table over brute-force per-sample optima; samples supplied by the
// caller as optimal action ids.
struct ActionFrequency {
  std::vector<std::uint32_t> ids;     // descending frequency, ties by lower id
  std::vector<int> counts;
  int total = 0;
};

ActionFrequency tally_actions(const std::vector<std::uint32_t>& optimal_ids);

// Top-A actions by frequency with the identity injected; guard n <= 20 keeps
// the 2^n enumeration the callers run bounded.
ActionSpace reduce_action_space(const ActionFrequency& freq, int n, int a_count);

double coverage(const ActionSpace& actions, const std::vector<std::uint32_t>& held_out);

// Best sign pattern over all 2^n by exhaustive enumeration.
// terms[k][i][n] holds the per-element contributions phi_n (G_k w_i)_n; the
// pattern score is the sum rate with rows S[k][i] = sum_n d_n terms[k][i][n].
std::uint32_t brute_force_best_action(const std::vector<CMat>& terms, double sigma2);

struct QuantileTable {
  int num_states = 0;
  int num_actions = 0;
  int num_quantiles = 0;
  std::vector<std::uint32_t> action_ids;
  std::vector<double> z;  // [s][a][q], each cell sorted nondecreasing

  double* cell(int s, int a) { return z.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_quantiles; }
  const double* cell(int s, int a) const { return z.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_quantiles; }
  double expected_return(int s, int a) const;
  int greedy_action(int s) const;  // ties resolve to the lowest index
};

QuantileTable make_quantile_table(int S, const ActionSpace& actions, int Q);

void save_table(const QuantileTable& t, const std::string& path);
QuantileTable load_table(const std::string& path);

// Equal-weight projection of an arbitrary sample multiset onto Q supports at
// levels (2q-1)/2Q, lower (type-1) empirical quantiles. Minimizes the
// asymmetric pinball loss over all Q-support models.
std::vector<double> quantile_projection(std::vector<double> samples, int Q);

// Weighted variant: samples with nonnegative weights summing to ~1.
std::vector<double> quantile_projection_weighted(std::vector<std::pair<double, double>> weighted,
                                                 int Q);

double pinball_loss(const std::vector<double>& supports, const std::vector<double>& samples);

// Mean absolute difference of sorted supports: the 1-Wasserstein distance
// between two equal-weight Q-support distributions.
double d1_distance(const double* a, const double* b, int q);
double max_d1(const QuantileTable& a, const QuantileTable& b);

struct StepResult {
  int chosen_action = 0;  // index into the action list
  bool updated = false;
};

// One slot of the distributional learner. Picks the next slot's action
// epsilon-greedily, then replaces the previous cell with the projection of
// reward + gamma * next-state supports at that chosen action (the learner
// bootstraps on the action it actually takes). prev_action < 0 marks the
// first slot of an episode (nothing to update).
StepResult qrdrl_step(QuantileTable& table, int prev_state, int prev_action,
                      double reward, int next_state, double gamma,
                      double epsilon, std::mt19937_64& rng);

struct QTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::uint32_t> action_ids;
  std::vector<double> q;  // [s][a]

  double& at(int s, int a) { return q[static_cast<std::size_t>(s) * num_actions + a]; }
  double at(int s, int a) const { return q[static_cast<std::size_t>(s) * num_actions + a]; }
  int greedy_action(int s) const;
};

QTable make_q_table(int S, const ActionSpace& actions);

StepResult qlearning_step(QTable& table, int prev_state, int prev_action,
                          double reward, int next_state, double gamma,
                          double lr, double epsilon, std::mt19937_64& rng);

// ---- Contraction diagnostics on synthetic MDPs ----

struct SyntheticMdp {
  int S = 0;
  int A = 0;
  std::vector<int> policy;               // deterministic, per state
  std::vector<double> transition;        // [s][a][s'], rows sum to 1
  std::vector<double> reward;            // [s][a] in [0, 1]
};

SyntheticMdp random_mdp(int S, int A, std::mt19937_64& rng);

// Projected distributional policy-evaluation operator: for each (s, a) the
// target is the mixture of r(s,a) + gamma z_q(s', policy(s')) weighted by
// transition probability / Q, re-projected onto Q supports.
QuantileTable apply_projected_operator(const QuantileTable& z, const SyntheticMdp& mdp,
                                       double gamma);

struct ContractionReport {
  int trials = 0;
  int violations = 0;
  double max_excess = 0.0;    // worst lhs - rhs over all trials
  double mean_lhs = 0.0;
};

// Checks max-d1(PT Z1, PT Z2) <= gamma (max-d1(Z1, Z2) + theta_bar / Q) with
// theta_bar the maximum support magnitude over the two tables.
ContractionReport verify_contraction(int trials, int S, int A, int Q, double gamma,
                                     std::uint64_t seed);

// Distances between successive operator applications from a random table.
std::vector<double> operator_iterate_trace(int S, int A, int Q, double gamma,
                                           int applications, std::uint64_t seed);

}  // namespace optlab
