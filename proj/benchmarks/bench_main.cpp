// Microbenchmarks for the hot paths: channel estimation, the alternating
// rate maximizer, exhaustive flip-pattern search, and the learner inner loops.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "optlab/channel.hpp"
#include "optlab/drl.hpp"
#include "optlab/estimation.hpp"
#include "optlab/fp.hpp"
#include "optlab/rng.hpp"
#include "optlab/types.hpp"

namespace {

using optlab::CMat;
using optlab::CVec;
using optlab::cplx;

optlab::ChannelSet synthetic_channels(int K, int N, int M, std::uint64_t seed) {
  auto rng = optlab::make_rng(seed, optlab::Stream::Placement, 0);
  optlab::ChannelSet ch;
  ch.true_G.reserve(K);
  for (int k = 0; k < K; ++k) {
    CMat G(N, M);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) G(n, m) = optlab::circular_gaussian(rng);
    ch.true_G.push_back(std::move(G));
    ch.path_loss_lin.push_back(1.0);
    ch.distance.push_back(30.0);
  }
  ch.wavelength = 0.01;
  ch.bs_steering = CVec::Ones(M);
  return ch;
}

optlab::FPProblem make_problem(const optlab::ChannelSet& ch) {
  optlab::FPProblem prob;
  prob.channels = &ch;
  prob.sigma2 = 1e-3;
  prob.bandwidth = 1.0;
  prob.p_max = 10.0;
  return prob;
}

void BM_PilotEstimation(benchmark::State& state) {
  const auto ch = synthetic_channels(4, 16, 16, 11);
  auto rng = optlab::make_rng(11, optlab::Stream::PilotNoise, 0);
  for (auto _ : state) {
    auto report = optlab::run_pilot_phase(ch, 0.01, 1e-12, rng);
    benchmark::DoNotOptimize(report.est_G);
  }
}
BENCHMARK(BM_PilotEstimation)->Unit(benchmark::kMicrosecond);

void BM_PrecoderUpdate(benchmark::State& state) {
  const auto ch = synthetic_channels(4, 16, 16, 12);
  const auto prob = make_problem(ch);
  const CVec phi = CVec::Ones(16);
  const CMat rows = prob.rows(phi);
  const CMat W0 = optlab::matched_equal_power(rows, prob.p_max);
  const optlab::RVec alpha = optlab::update_alpha(rows, W0, prob.sigma2);
  const optlab::RVec a_hat = optlab::alpha_hat(alpha, prob.bandwidth);
  const CVec lambda = optlab::update_lambda(rows, W0, a_hat, prob.sigma2);
  for (auto _ : state) {
    CMat W = optlab::update_precoder(rows, lambda, a_hat, prob.p_max, 1e-12);
    benchmark::DoNotOptimize(W.data());
  }
}
BENCHMARK(BM_PrecoderUpdate)->Unit(benchmark::kMicrosecond);

void BM_ReflectionSweep(benchmark::State& state) {
  const auto ch = synthetic_channels(4, 16, 16, 13);
  const auto prob = make_problem(ch);
  const CVec phi = CVec::Ones(16);
  const CMat rows = prob.rows(phi);
  const CMat W0 = optlab::matched_equal_power(rows, prob.p_max);
  const optlab::RVec alpha = optlab::update_alpha(rows, W0, prob.sigma2);
  const optlab::RVec a_hat = optlab::alpha_hat(alpha, prob.bandwidth);
  const CVec delta = optlab::update_delta(rows, W0, a_hat, prob.sigma2);
  const auto quad =
      optlab::build_phi_quadratic(ch.true_G, W0, delta, a_hat, prob.sigma2);
  for (auto _ : state) {
    CVec out = optlab::maximize_phi_quadratic(quad, phi);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ReflectionSweep)->Unit(benchmark::kMicrosecond);

void BM_SingleOuterIteration(benchmark::State& state) {
  const auto ch = synthetic_channels(4, 16, 16, 14);
  const auto prob = make_problem(ch);
  optlab::FPConfig cfg;
  cfg.max_outer_iters = 1;
  const CVec phi = CVec::Ones(16);
  const CMat rows = prob.rows(phi);
  const CMat W0 = optlab::matched_equal_power(rows, prob.p_max);
  for (auto _ : state) {
    auto res = optlab::fp_run(prob, cfg, phi, W0);
    benchmark::DoNotOptimize(res.sum_rate);
  }
}
BENCHMARK(BM_SingleOuterIteration)->Unit(benchmark::kMillisecond);

void BM_FullRateMaximization(benchmark::State& state) {
  const auto ch = synthetic_channels(4, 16, 16, 15);
  const auto prob = make_problem(ch);
  const optlab::FPConfig cfg;
  for (auto _ : state) {
    auto res = optlab::algorithm1(prob, cfg);
    benchmark::DoNotOptimize(res.sum_rate);
  }
}
BENCHMARK(BM_FullRateMaximization)->Unit(benchmark::kMillisecond);

void BM_FlipPatternEnumeration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto rng = optlab::make_rng(16, optlab::Stream::Placement, 1);
  std::vector<CMat> terms;
  for (int k = 0; k < 4; ++k) {
    CMat t(4, n);
    for (int i = 0; i < t.rows(); ++i)
      for (int j = 0; j < n; ++j) t(i, j) = optlab::circular_gaussian(rng);
    terms.push_back(std::move(t));
  }
  for (auto _ : state) {
    std::uint32_t best = optlab::brute_force_best_action(terms, 1e-3);
    benchmark::DoNotOptimize(best);
  }
}
BENCHMARK(BM_FlipPatternEnumeration)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_QuantileProjection(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  auto rng = optlab::make_rng(17, optlab::Stream::Placement, 2);
  std::vector<double> samples(m);
  for (auto& s : samples) s = optlab::gaussian(rng);
  for (auto _ : state) {
    auto supports = optlab::quantile_projection(samples, 40);
    benchmark::DoNotOptimize(supports.data());
  }
}
BENCHMARK(BM_QuantileProjection)->Arg(80)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_DistributionalStep(benchmark::State& state) {
  optlab::ActionSpace actions;
  actions.n = 16;
  actions.ids = {1, 2, 3, 4};
  for (auto id : actions.ids)
    actions.signs.push_back(optlab::decode_action(id, actions.n));
  auto table = optlab::make_quantile_table(8, actions, 40);
  auto rng = optlab::make_rng(18, optlab::Stream::Exploration, 0);
  std::uniform_int_distribution<int> st(0, 7);
  int prev_state = 0, prev_action = 0;
  for (auto _ : state) {
    const int next = st(rng);
    auto res = optlab::qrdrl_step(table, prev_state, prev_action, 1.0, next,
                                  0.9, 0.1, rng);
    prev_state = next;
    prev_action = res.chosen_action;
    benchmark::DoNotOptimize(table.z.data());
  }
}
BENCHMARK(BM_DistributionalStep)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
