#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optlab/csv.hpp"
#include "optlab/harness.hpp"
#include "optlab/matrix_io.hpp"

namespace fs = std::filesystem;
using namespace optlab;

namespace {

NetworkConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    NetworkConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_config(path);
}

void ensure_dir(const std::string& out) {
  if (!out.empty()) fs::create_directories(out);
}

fs::path out_file(const std::string& out, const std::string& name) {
  return out.empty() ? fs::path(name) : fs::path(out) / name;
}

std::vector<SchemeId> parse_schemes(const std::string& list) {
  std::vector<SchemeId> schemes;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) schemes.push_back(parse_scheme(tok));
  }
  if (schemes.empty()) throw std::invalid_argument("empty scheme list");
  return schemes;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) values.push_back(std::stod(tok));
  }
  if (values.empty()) throw std::invalid_argument("empty value list");
  return values;
}

// The Q-table reuses the quantile container with Q = 1 so both learners
// share one serialization format.
QuantileTable as_quantile(const QTable& t) {
  QuantileTable z;
  z.num_states = t.num_states;
  z.num_actions = t.num_actions;
  z.num_quantiles = 1;
  z.action_ids = t.action_ids;
  z.z = t.q;
  return z;
}

int cmd_estimate(const std::string& config, std::uint64_t seed, const std::string& out,
                 int drops) {
  const NetworkConfig cfg = load_or_default(config);
  ensure_dir(out);
  double mean_sq = 0.0;
  double theory = 0.0;
  std::vector<ExperimentRecord> records;
  for (int i = 0; i < drops; ++i) {
    const std::uint64_t placement_seed =
        mix_seed(seed, static_cast<std::uint64_t>(Stream::Placement), i);
    const Geometry geo = derive_geometry(cfg.bs_position, cfg.ir_position,
                                         sample_ue_positions(placement_seed, cfg));
    std::mt19937_64 shadow = make_rng(seed, Stream::Shadowing, i);
    const ChannelSet ch = build_cascaded_channels(geo, cfg, shadow);
    std::mt19937_64 pilot = make_rng(seed, Stream::PilotNoise, i);
    const EstimationReport rep =
        run_pilot_phase(ch, cfg.pilot_power_watts(), cfg.noise_bs_watts(), pilot);
    theory = rep.theoretical_mse;
    double drop_mean = 0.0;
    for (double e : rep.squared_error) drop_mean += e;
    drop_mean /= rep.squared_error.size();
    mean_sq += drop_mean;
    ExperimentRecord rec;
    rec.scheme = "estimate";
    rec.variable = "drop";
    rec.value = i;
    rec.seed = seed;
    rec.metric = drop_mean;
    records.push_back(std::move(rec));
  }
  mean_sq /= drops;
  emit_csv(records, out_file(out, "estimate.csv").string());
  std::cout << "runs=" << drops << " mean_squared_error=" << mean_sq
            << " theoretical=" << theory << " ratio=" << mean_sq / theory << '\n';
  return 0;
}

int cmd_optimize(const std::string& config, std::uint64_t seed, const std::string& out,
                 const std::string& scheme) {
  const NetworkConfig cfg = load_or_default(config);
  ensure_dir(out);
  const ExperimentRecord rec = run_drop(cfg, parse_scheme(scheme), seed);
  emit_csv({rec}, out_file(out, "optimize.csv").string());
  if (rec.failed) {
    std::cerr << "error: " << rec.error << '\n';
    return 1;
  }
  std::cout << "scheme=" << rec.scheme << " seed=" << rec.seed
            << " time_avg_rate_bps=" << rec.metric;
  if (rec.iterations) std::cout << " outer_iterations=" << *rec.iterations;
  std::cout << '\n';
  return 0;
}

int cmd_sweep(const std::string& config, std::uint64_t seed, const std::string& out,
              const std::string& scheme_list, const std::string& var,
              const std::string& value_list, int drops, int workers) {
  const NetworkConfig cfg = load_or_default(config);
  ensure_dir(out);
  const SweepResult res = sweep(cfg, parse_schemes(scheme_list), var,
                                parse_values(value_list), drops, seed, workers);
  emit_csv(res.records, out_file(out, "records.csv").string());
  emit_plot_data(res.records, out_file(out, "plot.csv").string());
  int failed = 0;
  for (const auto& r : res.records) failed += r.failed;
  std::cout << "records=" << res.records.size() << " failed=" << failed << " -> "
            << out_file(out, "records.csv").string() << '\n';
  return 0;
}

int cmd_reduce(const std::string& config, std::uint64_t seed, const std::string& out,
               int samples, int workers) {
  const NetworkConfig cfg = load_or_default(config);
  ensure_dir(out);
  const ActionFrequency freq = sample_optimal_actions(cfg, samples, seed, workers);
  const ActionSpace actions =
      reduce_action_space(freq, cfg.num_ir_elements, cfg.reduced_action_count);
  std::ofstream f(out_file(out, "actions.csv"));
  f << "action_id,count\n";
  for (std::size_t i = 0; i < freq.ids.size(); ++i)
    f << freq.ids[i] << ',' << freq.counts[i] << '\n';
  std::ofstream r(out_file(out, "reduced_actions.txt"));
  for (std::size_t i = 0; i < actions.ids.size(); ++i)
    r << (i ? " " : "") << actions.ids[i];
  r << '\n';
  std::cout << "samples=" << samples << " distinct=" << freq.ids.size()
            << " reduced=" << actions.ids.size() << '\n';
  return 0;
}

int cmd_train(const std::string& config, std::uint64_t seed, const std::string& out,
              int episodes) {
  const NetworkConfig cfg = load_or_default(config);
  ensure_dir(out);
  TrainOptions opts;
  if (episodes >= 0) opts.episodes = episodes;
  const TrainEvalResult res = train_and_eval(cfg, opts, seed);
  if (!res.training.empty())
    emit_csv(res.training, out_file(out, "training.csv").string());
  emit_csv(res.online, out_file(out, "online.csv").string());
  save_table(res.qr_table, out_file(out, "qrdrl_table.txt").string());
  save_table(as_quantile(res.q_table), out_file(out, "qlearning_table.txt").string());
  std::cout << "episodes=" << opts.episodes << " e_th=" << res.calibrated_e_th
            << " online qrdrl=" << res.online_mean_qrdrl
            << " qlearning=" << res.online_mean_qlearning
            << " no_adapt=" << res.online_mean_no_adapt << '\n';
  return 0;
}

int cmd_evaluate(const std::string& config, std::uint64_t seed, const std::string& out,
                 const std::string& scheme, int intervals) {
  const NetworkConfig cfg = load_or_default(config);
  const SchemeId id = parse_scheme(scheme);
  if (id != SchemeId::Qrdrl && id != SchemeId::Qlearning)
    throw std::invalid_argument("evaluate: scheme must be qrdrl or qlearning");
  const QuantileTable table = load_table(out_file(out, scheme + "_table.txt").string());

  ActionSpace actions;
  actions.n = cfg.num_ir_elements;
  actions.ids = table.action_ids;
  for (std::uint32_t aid : actions.ids)
    actions.signs.push_back(decode_action(aid, actions.n));

  TrainOptions opts;
  const double e_th = cfg.deviation_threshold > 0.0
                          ? cfg.deviation_threshold
                          : calibrate_deviation_threshold(cfg, seed, opts.calibration_drops,
                                                          opts.calibration_slots);
  QTable qt;
  const bool is_qr = id == SchemeId::Qrdrl;
  if (!is_qr) {
    if (table.num_quantiles != 1)
      throw std::invalid_argument("evaluate: qlearning table must have Q = 1");
    qt.num_states = table.num_states;
    qt.num_actions = table.num_actions;
    qt.action_ids = table.action_ids;
    qt.q = table.z;
  }
  const OnlineResult res = run_online(cfg, is_qr ? &table : nullptr,
                                      is_qr ? nullptr : &qt, actions, e_th,
                                      intervals, seed);
  emit_csv(res.records, out_file(out, "online_" + scheme + ".csv").string());
  std::cout << "intervals=" << intervals << " " << scheme << "="
            << (is_qr ? res.mean_qrdrl : res.mean_qlearning)
            << " no_adapt=" << res.mean_no_adapt << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IR-assisted downlink optimization and learning workbench"};
  app.require_subcommand(1);

  std::string config, out, scheme = "proposed_fp", var = "P_max", values = "40";
  std::string scheme_list = "proposed_fp,fixed_ir,direct";
  std::uint64_t seed = 1;
  int drops = 100, episodes = -1, workers = 1;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key=value config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out, "output directory");
  };

  CLI::App* est = app.add_subcommand("estimate", "pilot-phase error statistics");
  add_common(est);
  est->add_option("--drops", drops, "number of pilot runs");

  CLI::App* opt = app.add_subcommand("optimize", "single-drop optimization");
  add_common(opt);
  opt->add_option("--scheme", scheme, "scheme to run");

  CLI::App* sw = app.add_subcommand("sweep", "multi-point scheme comparison");
  add_common(sw);
  sw->add_option("--scheme", scheme_list, "comma-separated scheme list");
  sw->add_option("--var", var, "P_max, b, M, or N");
  sw->add_option("--values", values, "comma-separated values");
  sw->add_option("--drops", drops, "drops per point");
  sw->add_option("--workers", workers, "worker threads");

  CLI::App* red = app.add_subcommand("reduce-actions", "brute-force flip tally");
  add_common(red);
  red->add_option("--drops", drops, "sampled drops");
  red->add_option("--workers", workers, "worker threads");

  CLI::App* tr = app.add_subcommand("train", "train both learners, then online eval");
  add_common(tr);
  tr->add_option("--episodes", episodes, "training episodes");

  CLI::App* ev = app.add_subcommand("evaluate", "online intervals from a saved table");
  add_common(ev);
  ev->add_option("--scheme", scheme, "qrdrl or qlearning");
  ev->add_option("--drops", drops, "online intervals");

  CLI::App* rep = app.add_subcommand("report", "aggregate a records file");
  add_common(rep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return cmd_estimate(config, seed, out, drops);
    if (opt->parsed()) return cmd_optimize(config, seed, out, scheme);
    if (sw->parsed())
      return cmd_sweep(config, seed, out, scheme_list, var, values, drops, workers);
    if (red->parsed()) return cmd_reduce(config, seed, out, drops, workers);
    if (tr->parsed()) return cmd_train(config, seed, out, episodes);
    if (ev->parsed()) return cmd_evaluate(config, seed, out, scheme, drops);
    if (rep->parsed()) {
      const auto records = load_csv(out_file(out, "records.csv").string());
      emit_plot_data(records, out_file(out, "plot.csv").string());
      std::cout << "aggregated " << records.size() << " records -> "
                << out_file(out, "plot.csv").string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
