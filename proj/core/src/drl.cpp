#include "optlab/drl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace optlab {

std::uint32_t encode_action(const std::vector<int>& signs) {
  std::uint32_t val = 0;
  for (int s : signs) {
    if (s != 1 && s != -1) throw std::invalid_argument("encode_action: signs must be +-1");
    val = (val << 1) | (s < 0 ? 1u : 0u);
  }
  return val + 1;
}

std::vector<int> decode_action(std::uint32_t id, int n) {
  if (id < 1 || id > (1u << n)) throw std::invalid_argument("decode_action: id out of range");
  const std::uint32_t val = id - 1;
  std::vector<int> signs(n);
  for (int e = 0; e < n; ++e) signs[e] = (val >> (n - 1 - e)) & 1u ? -1 : 1;
  return signs;
}

int ActionSpace::index_of(std::uint32_t id) const {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return static_cast<int>(it - ids.begin());
}

int ActionSpace::identity_index() const { return index_of(1); }

ActionFrequency tally_actions(const std::vector<std::uint32_t>& optimal_ids) {
  std::unordered_map<std::uint32_t, int> counts;
  for (std::uint32_t id : optimal_ids) ++counts[id];
  ActionFrequency f;
  f.total = static_cast<int>(optimal_ids.size());
  f.ids.reserve(counts.size());
  for (const auto& [id, c] : counts) f.ids.push_back(id);
  std::sort(f.ids.begin(), f.ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    const int ca = counts[a], cb = counts[b];
    return ca != cb ? ca > cb : a < b;
  });
  f.counts.reserve(f.ids.size());
  for (std::uint32_t id : f.ids) f.counts.push_back(counts[id]);
  return f;
}

ActionSpace reduce_action_space(const ActionFrequency& freq, int n, int a_count) {
  if (n < 1 || n > 20) throw std::invalid_argument("reduce_action_space: n outside [1, 20]");
  if (a_count < 1) throw std::invalid_argument("reduce_action_space: a_count < 1");
  std::vector<std::uint32_t> picked(
      freq.ids.begin(),
      freq.ids.begin() + std::min<std::size_t>(freq.ids.size(), a_count));
  if (std::find(picked.begin(), picked.end(), 1u) == picked.end()) {
    if (static_cast<int>(picked.size()) == a_count) picked.pop_back();
    picked.push_back(1u);  // the do-nothing action is always available
  }
  std::sort(picked.begin(), picked.end());
  ActionSpace a;
  a.n = n;
  a.ids = std::move(picked);
  a.signs.reserve(a.ids.size());
  for (std::uint32_t id : a.ids) a.signs.push_back(decode_action(id, n));
  return a;
}

double coverage(const ActionSpace& actions, const std::vector<std::uint32_t>& held_out) {
  if (held_out.empty()) throw std::invalid_argument("coverage: empty held-out set");
  int hit = 0;
  for (std::uint32_t id : held_out)
    if (actions.index_of(id) >= 0) ++hit;
  return static_cast<double>(hit) / static_cast<double>(held_out.size());
}

std::uint32_t brute_force_best_action(const std::vector<CMat>& terms, double sigma2) {
  const int K = static_cast<int>(terms.size());
  const int I = static_cast<int>(terms[0].rows());
  const int n = static_cast<int>(terms[0].cols());
  if (n > 20) throw std::invalid_argument("brute_force_best_action: n > 20");

  // Row sums under the all-plus pattern; Gray-code order flips one element
  // per step, so each candidate costs O(K I) updates.
  std::vector<cplx> S(static_cast<std::size_t>(K) * I);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < I; ++i) S[static_cast<std::size_t>(k) * I + i] = terms[k].row(i).sum();

  const auto rate_of = [&]() {
    double r = 0.0;
    for (int k = 0; k < K; ++k) {
      double sig = 0.0, intf = 0.0;
      for (int i = 0; i < I; ++i) {
        const double p = std::norm(S[static_cast<std::size_t>(k) * I + i]);
        (i == k ? sig : intf) += p;
      }
      r += std::log2(1.0 + sig / (intf + sigma2));
    }
    return r;
  };

  std::vector<double> sign(n, 1.0);
  double best_rate = rate_of();
  std::uint32_t best_mask = 0;  // bit e set = element e flipped
  const std::uint64_t count = 1ull << n;
  for (std::uint64_t step = 1; step < count; ++step) {
    const int e = std::countr_zero(step);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < I; ++i)
        S[static_cast<std::size_t>(k) * I + i] -= 2.0 * sign[e] * terms[k](i, e);
    sign[e] = -sign[e];
    const double r = rate_of();
    if (r > best_rate) {
      best_rate = r;
      best_mask = static_cast<std::uint32_t>(step ^ (step >> 1));
    }
  }

  std::vector<int> signs(n);
  for (int e = 0; e < n; ++e) signs[e] = best_mask >> e & 1u ? -1 : 1;
  return encode_action(signs);
}

double QuantileTable::expected_return(int s, int a) const {
  const double* c = cell(s, a);
  double sum = 0.0;
  for (int q = 0; q < num_quantiles; ++q) sum += c[q];
  return sum / num_quantiles;
}

int QuantileTable::greedy_action(int s) const {
  int best = 0;
  double best_v = expected_return(s, 0);
  for (int a = 1; a < num_actions; ++a) {
    const double v = expected_return(s, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

QuantileTable make_quantile_table(int S, const ActionSpace& actions, int Q) {
  QuantileTable t;
  t.num_states = S;
  t.num_actions = static_cast<int>(actions.ids.size());
  t.num_quantiles = Q;
  t.action_ids = actions.ids;
  t.z.assign(static_cast<std::size_t>(S) * t.num_actions * Q, 0.0);
  return t;
}

void save_table(const QuantileTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_table: cannot open " + path);
  out << t.num_states << ' ' << t.num_actions << ' ' << t.num_quantiles << '\n';
  for (std::size_t i = 0; i < t.action_ids.size(); ++i)
    out << (i ? " " : "") << t.action_ids[i];
  out << '\n';
  out.precision(17);
  for (int s = 0; s < t.num_states; ++s)
    for (int a = 0; a < t.num_actions; ++a) {
      const double* c = t.cell(s, a);
      for (int q = 0; q < t.num_quantiles; ++q) out << (q ? " " : "") << c[q];
      out << '\n';
    }
  if (!out) throw std::runtime_error("save_table: write failed for " + path);
}

QuantileTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_table: cannot open " + path);
  QuantileTable t;
  in >> t.num_states >> t.num_actions >> t.num_quantiles;
  if (!in || t.num_states < 1 || t.num_actions < 1 || t.num_quantiles < 1)
    throw std::runtime_error("load_table: bad header in " + path);
  t.action_ids.resize(t.num_actions);
  for (auto& id : t.action_ids) in >> id;
  t.z.resize(static_cast<std::size_t>(t.num_states) * t.num_actions * t.num_quantiles);
  for (auto& v : t.z) in >> v;
  if (!in) throw std::runtime_error("load_table: truncated data in " + path);
  return t;
}

std::vector<double> quantile_projection(std::vector<double> samples, int Q) {
  if (samples.empty()) throw std::invalid_argument("quantile_projection: no samples");
  if (Q < 1) throw std::invalid_argument("quantile_projection: Q < 1");
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size();
  std::vector<double> z(Q);
  for (int q = 1; q <= Q; ++q) {
    const double level = (2.0 * q - 1.0) / (2.0 * Q);
    // Lower empirical quantile: smallest order statistic with rank >= level*m.
    std::size_t rank = static_cast<std::size_t>(std::ceil(level * m));
    if (rank < 1) rank = 1;
    if (rank > m) rank = m;
    z[q - 1] = samples[rank - 1];
  }
  return z;
}

std::vector<double> quantile_projection_weighted(
    std::vector<std::pair<double, double>> weighted, int Q) {
  if (weighted.empty()) throw std::invalid_argument("quantile_projection_weighted: no samples");
  if (Q < 1) throw std::invalid_argument("quantile_projection_weighted: Q < 1");
  std::sort(weighted.begin(), weighted.end());
  double total = 0.0;
  for (const auto& [v, w] : weighted) {
    if (w < 0.0) throw std::invalid_argument("quantile_projection_weighted: negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("quantile_projection_weighted: zero mass");
  std::vector<double> z(Q);
  std::size_t j = 0;
  double cum = weighted[0].second;
  for (int q = 1; q <= Q; ++q) {
    const double target = (2.0 * q - 1.0) / (2.0 * Q) * total;
    while (cum < target && j + 1 < weighted.size()) cum += weighted[++j].second;
    z[q - 1] = weighted[j].first;
  }
  return z;
}

double pinball_loss(const std::vector<double>& supports, const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("pinball_loss: no samples");
  const int Q = static_cast<int>(supports.size());
  double loss = 0.0;
  for (int q = 1; q <= Q; ++q) {
    const double level = (2.0 * q - 1.0) / (2.0 * Q);
    double acc = 0.0;
    for (double x : samples) {
      const double u = x - supports[q - 1];
      acc += u * (level - (u < 0.0 ? 1.0 : 0.0));
    }
    loss += acc / static_cast<double>(samples.size());
  }
  return loss;
}

double d1_distance(const double* a, const double* b, int q) {
  double sum = 0.0;
  for (int i = 0; i < q; ++i) sum += std::abs(a[i] - b[i]);
  return sum / q;
}

double max_d1(const QuantileTable& a, const QuantileTable& b) {
  if (a.num_states != b.num_states || a.num_actions != b.num_actions ||
      a.num_quantiles != b.num_quantiles)
    throw std::invalid_argument("max_d1: mismatched table shapes");
  double worst = 0.0;
  for (int s = 0; s < a.num_states; ++s)
    for (int act = 0; act < a.num_actions; ++act)
      worst = std::max(worst, d1_distance(a.cell(s, act), b.cell(s, act), a.num_quantiles));
  return worst;
}

namespace {

int epsilon_greedy(int greedy, int num_actions, double epsilon, std::mt19937_64& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, num_actions - 1);
      return pick(rng);
    }
  }
  return greedy;
}

}  // namespace

StepResult qrdrl_step(QuantileTable& table, int prev_state, int prev_action,
                      double reward, int next_state, double gamma,
                      double epsilon, std::mt19937_64& rng) {
  StepResult res;
  res.chosen_action = epsilon_greedy(table.greedy_action(next_state), table.num_actions,
                                     epsilon, rng);
  if (prev_action >= 0) {
    // Bootstrap with the action actually chosen for the next slot, then
    // replace the previous cell with the projected target distribution.
    // The equal-count projection of sorted targets is the targets themselves.
    std::vector<double> target(table.num_quantiles);
    const double* next = table.cell(next_state, res.chosen_action);
    for (int q = 0; q < table.num_quantiles; ++q) target[q] = reward + gamma * next[q];
    double* prev = table.cell(prev_state, prev_action);
    std::copy(target.begin(), target.end(), prev);
    std::sort(prev, prev + table.num_quantiles);
    res.updated = true;
  }
  return res;
}

int QTable::greedy_action(int s) const {
  int best = 0;
  double best_v = at(s, 0);
  for (int a = 1; a < num_actions; ++a)
    if (at(s, a) > best_v) {
      best_v = at(s, a);
      best = a;
    }
  return best;
}

QTable make_q_table(int S, const ActionSpace& actions) {
  QTable t;
  t.num_states = S;
  t.num_actions = static_cast<int>(actions.ids.size());
  t.action_ids = actions.ids;
  t.q.assign(static_cast<std::size_t>(S) * t.num_actions, 0.0);
  return t;
}

StepResult qlearning_step(QTable& table, int prev_state, int prev_action,
                          double reward, int next_state, double gamma,
                          double lr, double epsilon, std::mt19937_64& rng) {
  StepResult res;
  const int greedy = table.greedy_action(next_state);
  if (prev_action >= 0) {
    const double target = reward + gamma * table.at(next_state, greedy);
    double& cell = table.at(prev_state, prev_action);
    cell += lr * (target - cell);
    res.updated = true;
  }
  res.chosen_action = epsilon_greedy(greedy, table.num_actions, epsilon, rng);
  return res;
}

SyntheticMdp random_mdp(int S, int A, std::mt19937_64& rng) {
  SyntheticMdp m;
  m.S = S;
  m.A = A;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> act(0, A - 1);
  m.policy.resize(S);
  for (int s = 0; s < S; ++s) m.policy[s] = act(rng);
  m.transition.resize(static_cast<std::size_t>(S) * A * S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double* row = m.transition.data() + (static_cast<std::size_t>(s) * A + a) * S;
      double sum = 0.0;
      for (int t = 0; t < S; ++t) sum += row[t] = uni(rng) + 1e-3;
      for (int t = 0; t < S; ++t) row[t] /= sum;
    }
  m.reward.resize(static_cast<std::size_t>(S) * A);
  for (auto& r : m.reward) r = uni(rng);
  return m;
}

QuantileTable apply_projected_operator(const QuantileTable& z, const SyntheticMdp& mdp,
                                       double gamma) {
  QuantileTable out = z;
  const int Q = z.num_quantiles;
  std::vector<std::pair<double, double>> mix;
  mix.reserve(static_cast<std::size_t>(mdp.S) * Q);
  for (int s = 0; s < mdp.S; ++s)
    for (int a = 0; a < mdp.A; ++a) {
      mix.clear();
      const double r = mdp.reward[static_cast<std::size_t>(s) * mdp.A + a];
      const double* p = mdp.transition.data() + (static_cast<std::size_t>(s) * mdp.A + a) * mdp.S;
      for (int t = 0; t < mdp.S; ++t) {
        const double* cell = z.cell(t, mdp.policy[t]);
        for (int q = 0; q < Q; ++q) mix.emplace_back(r + gamma * cell[q], p[t] / Q);
      }
      const std::vector<double> proj = quantile_projection_weighted(mix, Q);
      std::copy(proj.begin(), proj.end(), out.cell(s, a));
    }
  return out;
}

namespace {

QuantileTable random_table(int S, const ActionSpace& actions, int Q, double lo, double hi,
                           std::mt19937_64& rng) {
  QuantileTable t = make_quantile_table(S, actions, Q);
  std::uniform_real_distribution<double> uni(lo, hi);
  for (auto& v : t.z) v = uni(rng);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < t.num_actions; ++a)
      std::sort(t.cell(s, a), t.cell(s, a) + Q);
  return t;
}

ActionSpace dummy_actions(int A) {
  ActionFrequency f;
  for (int a = 0; a < A; ++a) {
    f.ids.push_back(a + 1);
    f.counts.push_back(1);
  }
  f.total = A;
  return reduce_action_space(f, 20, A);
}

}  // namespace

ContractionReport verify_contraction(int trials, int S, int A, int Q, double gamma,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const SyntheticMdp mdp = random_mdp(S, A, rng);
  const ActionSpace actions = dummy_actions(A);
  const double r_max = 1.0;
  const double span = r_max / (1.0 - gamma);

  ContractionReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const QuantileTable z1 = random_table(S, actions, Q, 0.0, span, rng);
    const QuantileTable z2 = random_table(S, actions, Q, 0.0, span, rng);
    double theta_bar = 0.0;
    for (double v : z1.z) theta_bar = std::max(theta_bar, std::abs(v));
    for (double v : z2.z) theta_bar = std::max(theta_bar, std::abs(v));

    const double lhs = max_d1(apply_projected_operator(z1, mdp, gamma),
                              apply_projected_operator(z2, mdp, gamma));
    const double rhs = gamma * (max_d1(z1, z2) + theta_bar / Q);
    rep.mean_lhs += lhs;
    const double excess = lhs - rhs;
    if (excess > 1e-9) ++rep.violations;
    rep.max_excess = std::max(rep.max_excess, excess);
  }
  if (trials > 0) rep.mean_lhs /= trials;
  return rep;
}

std::vector<double> operator_iterate_trace(int S, int A, int Q, double gamma,
                                           int applications, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const SyntheticMdp mdp = random_mdp(S, A, rng);
  const ActionSpace actions = dummy_actions(A);
  QuantileTable z = random_table(S, actions, Q, 0.0, 1.0 / (1.0 - gamma), rng);
  std::vector<double> trace;
  trace.reserve(applications);
  for (int i = 0; i < applications; ++i) {
    QuantileTable next = apply_projected_operator(z, mdp, gamma);
    trace.push_back(max_d1(z, next));
    z = std::move(next);
  }
  return trace;
}

}  // namespace optlab
