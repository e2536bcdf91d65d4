#include "optlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace optlab {

std::string scheme_name(SchemeId s) {
  switch (s) {
    case SchemeId::ProposedFp: return "proposed_fp";
    case SchemeId::FixedIr: return "fixed_ir";
    case SchemeId::Direct: return "direct";
    case SchemeId::Qrdrl: return "qrdrl";
    case SchemeId::Qlearning: return "qlearning";
    case SchemeId::NoAdapt: return "no_adapt";
  }
  throw std::logic_error("scheme_name: bad enum");
}

SchemeId parse_scheme(const std::string& name) {
  for (SchemeId s : {SchemeId::ProposedFp, SchemeId::FixedIr, SchemeId::Direct,
                     SchemeId::Qrdrl, SchemeId::Qlearning, SchemeId::NoAdapt})
    if (scheme_name(s) == name) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

namespace {

// Episode indices are partitioned by purpose so training, evaluation,
// reduction, and calibration never share noise draws.
constexpr std::uint64_t kReduceBase = 0;
constexpr std::uint64_t kHoldOutBase = 1'000'000;
constexpr std::uint64_t kCalibrationBase = 2'000'000;
constexpr std::uint64_t kTrainBase = 3'000'000;
constexpr std::uint64_t kEvalBase = 4'000'000;

struct DropChannels {
  Geometry geo;
  ChannelSet ch;
};

// Geometry + true cascaded channels for one placement. In site mode the
// caller passes index 0 so every interval shares one deployment.
DropChannels build_reflected(const NetworkConfig& cfg, std::uint64_t seed,
                             std::uint64_t index) {
  DropChannels d;
  const std::uint64_t placement_seed = mix_seed(seed, static_cast<std::uint64_t>(Stream::Placement), index);
  const std::vector<Vec3> ues = sample_ue_positions(placement_seed, cfg);
  d.geo = derive_geometry(cfg.bs_position, cfg.ir_position, ues);
  std::mt19937_64 shadow = make_rng(seed, Stream::Shadowing, index);
  d.ch = build_cascaded_channels(d.geo, cfg, shadow);
  return d;
}

void attach_estimate(ChannelSet& ch, const NetworkConfig& cfg, std::uint64_t seed,
                     std::uint64_t index) {
  std::mt19937_64 pilot = make_rng(seed, Stream::PilotNoise, index);
  const EstimationReport rep =
      run_pilot_phase(ch, cfg.pilot_power_watts(), cfg.noise_bs_watts(), pilot);
  std::vector<CMat> projected(rep.est_G.size());
  for (std::size_t k = 0; k < rep.est_G.size(); ++k)
    projected[k] = project_onto_bs_direction(rep.est_G[k], ch.bs_steering);
  ch.est_G = std::move(projected);
}

FPConfig deployment_fp_config() {
  // Per-interval optimization budget; the full-accuracy budget stays with the
  // sweep path where each drop is optimized once.
  FPConfig cfg;
  cfg.max_outer_iters = 30;
  cfg.convergence_tol = 1e-4;
  return cfg;
}

// One coherence interval from the learners' viewpoint: the deployed
// reflection phi_hat and frozen precoder from estimated CSI, plus the
// per-element slot terms for true and estimated channels.
//   terms[k](i, n) = phi_hat_n (G_k w_i)_n
struct IntervalContext {
  std::vector<CMat> terms_true;
  std::vector<CMat> terms_est;
  double rate_no_adapt = 0.0;  // b-normalized, identity pattern
};

std::vector<CMat> make_terms(const std::vector<CMat>& G, const CMat& W, const CVec& phi) {
  std::vector<CMat> terms(G.size());
  for (std::size_t k = 0; k < G.size(); ++k) {
    const CMat B = G[k] * W;  // N x K
    CMat t(W.cols(), phi.size());
    for (Eigen::Index i = 0; i < W.cols(); ++i)
      for (Eigen::Index n = 0; n < phi.size(); ++n) t(i, n) = phi[n] * B(n, i);
    terms[k] = std::move(t);
  }
  return terms;
}

double pattern_rate(const std::vector<CMat>& terms, const std::vector<double>& sign,
                    double sigma2) {
  double r = 0.0;
  const int K = static_cast<int>(terms.size());
  for (int k = 0; k < K; ++k) {
    double sig = 0.0, intf = 0.0;
    for (Eigen::Index i = 0; i < terms[k].rows(); ++i) {
      cplx s = 0.0;
      for (Eigen::Index n = 0; n < terms[k].cols(); ++n) s += sign[n] * terms[k](i, n);
      (i == k ? sig : intf) += std::norm(s);
    }
    r += std::log2(1.0 + sig / (intf + sigma2));
  }
  return r;
}

IntervalContext build_interval(const NetworkConfig& cfg, std::uint64_t seed,
                               std::uint64_t index, bool fixed_site) {
  // fixed_site pins placement, shadowing, and the deployment-time channel
  // estimate, so successive intervals at one site differ only in symbols and
  // receiver noise. Fresh-drop callers vary everything with the index.
  DropChannels d = build_reflected(cfg, seed, fixed_site ? 0 : index);
  attach_estimate(d.ch, cfg, seed, fixed_site ? 0 : index);
  FPProblem prob;
  prob.channels = &d.ch;
  prob.optimize_reflection = true;
  prob.uses_estimate = true;
  prob.sigma2 = cfg.noise_ue_watts();
  prob.bandwidth = cfg.bandwidth;
  prob.p_max = cfg.bs_power_watts();
  const FPResult fp = algorithm1(prob, deployment_fp_config());

  IntervalContext ctx;
  ctx.terms_true = make_terms(d.ch.true_G, fp.W, fp.phi);
  ctx.terms_est = make_terms(*d.ch.est_G, fp.W, fp.phi);
  const std::vector<double> ones(fp.phi.size(), 1.0);
  ctx.rate_no_adapt = pattern_rate(ctx.terms_true, ones, cfg.noise_ue_watts()) ;
  return ctx;
}

struct SlotObs {
  int state = 0;
  double rate = 0.0;  // b-normalized under the current pattern
};

SlotObs observe_slot(const IntervalContext& ctx, const std::vector<double>& sign,
                     double sigma2, double e_th, std::mt19937_64& symbols_rng) {
  const int K = static_cast<int>(ctx.terms_true.size());
  const CVec beta = circular_gaussian_vec(symbols_rng, K);
  CVec z(K);
  for (int k = 0; k < K; ++k) z[k] = std::sqrt(sigma2) * circular_gaussian(symbols_rng);

  SlotObs obs;
  for (int k = 0; k < K; ++k) {
    cplx y = z[k], y_hat = 0.0;
    for (int i = 0; i < K; ++i) {
      cplx s_true = 0.0, s_est = 0.0;
      for (Eigen::Index n = 0; n < ctx.terms_true[k].cols(); ++n) {
        s_true += sign[n] * ctx.terms_true[k](i, n);
        s_est += sign[n] * ctx.terms_est[k](i, n);
      }
      y += s_true * beta[i];
      y_hat += s_est * beta[i];
    }
    if (std::norm(y - y_hat) > e_th) obs.state |= 1 << k;
  }
  obs.rate = pattern_rate(ctx.terms_true, sign, sigma2);
  return obs;
}

ExperimentRecord base_record(SchemeId scheme, std::uint64_t seed) {
  ExperimentRecord r;
  r.scheme = scheme_name(scheme);
  r.seed = seed;
  return r;
}

}  // namespace

ExperimentRecord run_drop(const NetworkConfig& cfg, SchemeId scheme, std::uint64_t seed) {
  ExperimentRecord rec = base_record(scheme, seed);
  try {
    const double sigma2 = cfg.noise_ue_watts();
    const double p_max = cfg.bs_power_watts();
    FPConfig fp_cfg;
    switch (scheme) {
      case SchemeId::ProposedFp:
      case SchemeId::NoAdapt: {
        DropChannels d = build_reflected(cfg, seed, 0);
        attach_estimate(d.ch, cfg, seed, 0);
        FPProblem prob;
        prob.channels = &d.ch;
        prob.optimize_reflection = true;
        prob.uses_estimate = true;
        prob.sigma2 = sigma2;
        prob.bandwidth = cfg.bandwidth;
        prob.p_max = p_max;
        const FPResult fp = algorithm1(prob, fp_cfg);
        const double rate = sum_rate(fp.W, fp.phi, d.ch, cfg.bandwidth, sigma2);
        rec.metric = time_avg_rate(rate, OverheadScheme::IrOptimized, cfg);
        rec.iterations = fp.iterations;
        break;
      }
      case SchemeId::FixedIr: {
        DropChannels d = build_reflected(cfg, seed, 0);
        // One reflection pattern means one pilot sub-phase: the BS estimates
        // the K effective rows directly, then collapses each onto the known
        // BS-side steering direction (the raw estimate has rank the true
        // channel lacks, and the precoder would chase it).
        const CVec ones = CVec::Ones(cfg.num_ir_elements);
        const CMat rows_true = effective_rows(ones, d.ch.true_G);
        CMat rows_est = rows_true;
        std::mt19937_64 pilot = make_rng(seed, Stream::PilotNoise, 0);
        const double err_sd = std::sqrt(cfg.noise_bs_watts() / cfg.pilot_power_watts());
        const CVec a = d.ch.bs_steering;
        for (Eigen::Index k = 0; k < rows_est.rows(); ++k) {
          for (Eigen::Index m = 0; m < rows_est.cols(); ++m)
            rows_est(k, m) += err_sd * circular_gaussian(pilot);
          const cplx c = (rows_est.row(k) * a)(0) / static_cast<double>(a.size());
          rows_est.row(k) = c * a.adjoint();
        }
        FPProblem prob;
        prob.direct_rows = rows_est;
        prob.sigma2 = sigma2;
        prob.bandwidth = cfg.bandwidth;
        prob.p_max = p_max;
        const FPResult fp = algorithm1(prob, fp_cfg);
        const double rate = sum_rate_rows(rows_true, fp.W, cfg.bandwidth, sigma2);
        rec.metric = time_avg_rate(rate, OverheadScheme::FixedIr, cfg);
        rec.iterations = fp.iterations;
        break;
      }
      case SchemeId::Direct: {
        const std::uint64_t placement_seed =
            mix_seed(seed, static_cast<std::uint64_t>(Stream::Placement), 0);
        const std::vector<Vec3> ues = sample_ue_positions(placement_seed, cfg);
        const Geometry geo = derive_geometry(cfg.bs_position, cfg.ir_position, ues);
        std::mt19937_64 shadow = make_rng(seed, Stream::Shadowing, 0);
        const DirectChannelSet direct = build_direct_channels(geo, cfg, shadow);
        FPProblem prob;
        prob.direct_rows = direct.rows;
        prob.sigma2 = sigma2;
        prob.bandwidth = cfg.bandwidth;
        prob.p_max = p_max;
        const FPResult fp = algorithm1(prob, fp_cfg);
        const double rate = sum_rate_rows(direct.rows, fp.W, cfg.bandwidth, sigma2);
        rec.metric = time_avg_rate(rate, OverheadScheme::Direct, cfg);
        rec.iterations = fp.iterations;
        break;
      }
      case SchemeId::Qrdrl:
      case SchemeId::Qlearning:
        throw std::invalid_argument(
            "learner schemes need a trained table; use train/evaluate");
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.metric = 0.0;
  }
  return rec;
}

SweepResult sweep(const NetworkConfig& cfg, const std::vector<SchemeId>& schemes,
                  const std::string& variable, const std::vector<double>& values,
                  int drops, std::uint64_t seed, int workers) {
  if (drops < 1) throw std::invalid_argument("sweep: drops < 1");
  std::vector<NetworkConfig> configs;
  configs.reserve(values.size());
  for (double v : values) {
    NetworkConfig c = cfg;
    if (variable == "P_max") c.bs_power_max = v;
    else if (variable == "b") c.bandwidth = v;
    else if (variable == "M") c.num_bs_antennas = static_cast<int>(v);
    else if (variable == "N") c.num_ir_elements = static_cast<int>(v);
    else throw std::invalid_argument("sweep: variable must be P_max, b, M, or N");
    c.validate();
    configs.push_back(std::move(c));
  }

  SweepResult out;
  out.records.resize(values.size() * drops * schemes.size());
  std::atomic<std::size_t> cursor{0};
  const std::size_t points = values.size() * static_cast<std::size_t>(drops);
  const auto worker = [&]() {
    for (std::size_t i = cursor.fetch_add(1); i < points; i = cursor.fetch_add(1)) {
      const std::size_t vi = i / drops;
      const std::size_t di = i % drops;
      for (std::size_t si = 0; si < schemes.size(); ++si) {
        ExperimentRecord rec = run_drop(configs[vi], schemes[si], seed + di);
        rec.variable = variable;
        rec.value = values[vi];
        out.records[(vi * drops + di) * schemes.size() + si] = std::move(rec);
      }
    }
  };
  const int n_threads = std::max(1, workers);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

ActionFrequency sample_optimal_actions(const NetworkConfig& cfg, int samples,
                                       std::uint64_t seed, int workers) {
  if (samples < 1) throw std::invalid_argument("sample_optimal_actions: samples < 1");
  std::vector<std::uint32_t> ids(samples);
  std::atomic<int> cursor{0};
  const double sigma2 = cfg.noise_ue_watts();
  const auto worker = [&]() {
    for (int i = cursor.fetch_add(1); i < samples; i = cursor.fetch_add(1)) {
      const IntervalContext ctx =
          build_interval(cfg, seed, kReduceBase + i, /*fixed_site=*/false);
      ids[i] = brute_force_best_action(ctx.terms_true, sigma2);
    }
  };
  const int n_threads = std::max(1, workers);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return tally_actions(ids);
}

double calibrate_deviation_threshold(const NetworkConfig& cfg, std::uint64_t seed,
                                     int drops, int slots_per_drop) {
  if (drops < 1 || slots_per_drop < 1)
    throw std::invalid_argument("calibrate_deviation_threshold: empty probe");
  const double sigma2 = cfg.noise_ue_watts();
  std::vector<double> devs;
  devs.reserve(static_cast<std::size_t>(drops) * slots_per_drop * cfg.num_ues);
  const IntervalContext ctx =
      build_interval(cfg, seed, kCalibrationBase, /*fixed_site=*/true);
  for (int i = 0; i < drops; ++i) {
    std::mt19937_64 rng = make_rng(seed, Stream::Calibration, i);
    const int K = static_cast<int>(ctx.terms_true.size());
    for (int sl = 0; sl < slots_per_drop; ++sl) {
      const CVec beta = circular_gaussian_vec(rng, K);
      for (int k = 0; k < K; ++k) {
        cplx e = std::sqrt(sigma2) * circular_gaussian(rng);
        for (int i2 = 0; i2 < K; ++i2) {
          const cplx diff = ctx.terms_true[k].row(i2).sum() - ctx.terms_est[k].row(i2).sum();
          e += diff * beta[i2];
        }
        devs.push_back(std::norm(e));
      }
    }
  }
  std::nth_element(devs.begin(), devs.begin() + devs.size() / 2, devs.end());
  return devs[devs.size() / 2];
}

TrainEvalResult train_and_eval(const NetworkConfig& cfg, const TrainOptions& opts,
                               std::uint64_t seed) {
  const double sigma2 = cfg.noise_ue_watts();
  const int K = cfg.num_ues;
  const int S = 1 << K;
  const int L = cfg.slots_per_interval;
  const int N = cfg.num_ir_elements;

  TrainEvalResult out;

  // Action reduction over the scenario distribution (fresh drops, same
  // sampling as sample_optimal_actions); the reduced set is site-agnostic and
  // the learners then discover which of its entries helps this deployment.
  {
    std::vector<std::uint32_t> ids(opts.reduce_samples);
    for (int i = 0; i < opts.reduce_samples; ++i) {
      const IntervalContext ctx = build_interval(cfg, seed, kReduceBase + i, false);
      ids[i] = brute_force_best_action(ctx.terms_true, sigma2);
    }
    out.actions = reduce_action_space(tally_actions(ids), N, cfg.reduced_action_count);
  }

  out.calibrated_e_th = cfg.deviation_threshold > 0.0
                            ? cfg.deviation_threshold
                            : calibrate_deviation_threshold(cfg, seed, opts.calibration_drops,
                                                            opts.calibration_slots);

  out.qr_table = make_quantile_table(S, out.actions, cfg.num_quantiles);
  out.q_table = make_q_table(S, out.actions);
  const int A = static_cast<int>(out.actions.ids.size());
  const double gamma = cfg.discount;

  std::vector<double> window_qr, window_ql;
  const auto window_mean = [&](const std::vector<double>& w) {
    const std::size_t n = std::min<std::size_t>(w.size(), opts.curve_window);
    double s = 0.0;
    for (std::size_t i = w.size() - n; i < w.size(); ++i) s += w[i];
    return s / static_cast<double>(n);
  };

  // The deployment is one fixed site with one deployment-time estimate, so
  // the interval context is the same every episode; only symbol draws and
  // exploration vary below.
  const IntervalContext ctx = build_interval(cfg, seed, kTrainBase, true);

  for (int ep = 0; ep < opts.episodes; ++ep) {
    const double frac = opts.episodes > 1
        ? static_cast<double>(ep) / (opts.epsilon_decay_fraction * opts.episodes)
        : 1.0;
    const double eps = std::max(opts.epsilon_end,
                                opts.epsilon_start - (opts.epsilon_start - opts.epsilon_end) * frac);

    for (int method = 0; method < 2; ++method) {
      // Identical symbol/noise draws for both learners; fixed draw count per
      // slot keeps the streams aligned under differing actions.
      std::mt19937_64 symbols = make_rng(seed, Stream::Symbols, kTrainBase + ep);
      std::mt19937_64 explore =
          make_rng(seed, Stream::Exploration, 2 * static_cast<std::uint64_t>(ep) + method);
      std::vector<double> sign(N, 1.0);
      int s_prev = -1, a_prev = -1;
      double total = 0.0;
      for (int sl = 0; sl < L; ++sl) {
        const SlotObs obs = observe_slot(ctx, sign, sigma2, out.calibrated_e_th, symbols);
        total += obs.rate;
        StepResult step;
        if (method == 0) {
          step = qrdrl_step(out.qr_table, s_prev, a_prev, obs.rate, obs.state, gamma, eps,
                            explore);
        } else {
          step = qlearning_step(out.q_table, s_prev, a_prev, obs.rate, obs.state, gamma,
                                opts.qlearning_lr, eps, explore);
        }
        if (sl < L - 1) {
          for (int n = 0; n < N; ++n) sign[n] *= out.actions.signs[step.chosen_action][n];
          s_prev = obs.state;
          a_prev = step.chosen_action;
        }
      }
      (method == 0 ? window_qr : window_ql).push_back(total / L);

      ExperimentRecord rec;
      rec.scheme = method == 0 ? "qrdrl" : "qlearning";
      rec.variable = "episode";
      rec.value = ep;
      rec.seed = seed;
      rec.episode = ep;
      rec.metric = window_mean(method == 0 ? window_qr : window_ql);
      rec.coverage = eps;  // training rows carry the schedule in this column
      out.training.push_back(std::move(rec));
    }
  }

  const OnlineResult online = run_online(cfg, &out.qr_table, &out.q_table, out.actions,
                                         out.calibrated_e_th, opts.eval_intervals, seed);
  out.online = online.records;
  out.online_mean_qrdrl = online.mean_qrdrl;
  out.online_mean_qlearning = online.mean_qlearning;
  out.online_mean_no_adapt = online.mean_no_adapt;
  return out;
}

OnlineResult run_online(const NetworkConfig& cfg, const QuantileTable* qr,
                        const QTable* q, const ActionSpace& actions, double e_th,
                        int intervals, std::uint64_t seed) {
  const double sigma2 = cfg.noise_ue_watts();
  const int L = cfg.slots_per_interval;
  const int N = cfg.num_ir_elements;
  OnlineResult out;
  double sums[3] = {0.0, 0.0, 0.0};
  const IntervalContext ctx = build_interval(cfg, seed, kEvalBase, true);
  for (int i = 0; i < intervals; ++i) {
    for (int method = 0; method < 3; ++method) {
      if (method == 0 && qr == nullptr) continue;
      if (method == 1 && q == nullptr) continue;
      std::mt19937_64 symbols = make_rng(seed, Stream::Symbols, kEvalBase + i);
      std::vector<double> sign(N, 1.0);
      double total = 0.0;
      for (int sl = 0; sl < L; ++sl) {
        const SlotObs obs = observe_slot(ctx, sign, sigma2, e_th, symbols);
        total += obs.rate;
        if (method == 2 || sl == L - 1) continue;
        const int a = method == 0 ? qr->greedy_action(obs.state) : q->greedy_action(obs.state);
        for (int n = 0; n < N; ++n) sign[n] *= actions.signs[a][n];
      }
      sums[method] += total / L;

      ExperimentRecord rec;
      rec.scheme = method == 0 ? "qrdrl" : method == 1 ? "qlearning" : "no_adapt";
      rec.variable = "interval";
      rec.value = i;
      rec.seed = seed;
      rec.metric = total / L;
      out.records.push_back(std::move(rec));
    }
  }
  if (intervals > 0) {
    out.mean_qrdrl = sums[0] / intervals;
    out.mean_qlearning = sums[1] / intervals;
    out.mean_no_adapt = sums[2] / intervals;
  }
  return out;
}

std::vector<Aggregate> aggregate(const std::vector<ExperimentRecord>& records) {
  std::map<std::pair<std::string, double>, std::vector<double>> groups;
  for (const auto& r : records)
    if (!r.failed) groups[{r.scheme, r.value}].push_back(r.metric);
  std::vector<Aggregate> out;
  out.reserve(groups.size());
  for (const auto& [key, vals] : groups) {
    Aggregate a;
    a.scheme = key.first;
    a.value = key.second;
    a.count = static_cast<int>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    a.mean = mean;
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      a.stderr_ = std::sqrt(ss / (vals.size() - 1)) / std::sqrt(static_cast<double>(vals.size()));
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace optlab
