#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optlab/channel.hpp"
#include "optlab/config.hpp"
#include "optlab/drl.hpp"
#include "optlab/estimation.hpp"
#include "optlab/fp.hpp"

namespace optlab {

enum class SchemeId { ProposedFp, FixedIr, Direct, Qrdrl, Qlearning, NoAdapt };

std::string scheme_name(SchemeId s);
SchemeId parse_scheme(const std::string& name);

struct ExperimentRecord {
  std::string scheme;
  std::string variable;
  double value = 0.0;
  std::uint64_t seed = 0;
  double metric = 0.0;               // time-average sum rate, bits/s
  std::optional<double> iterations;
  std::optional<double> coverage;
  std::optional<double> episode;
  bool failed = false;
  std::string error;

  bool operator==(const ExperimentRecord&) const = default;
};

// One placement, channels, estimate, optimize, rate. Deterministic per seed;
// module failures come back as failed records, not exceptions.
ExperimentRecord run_drop(const NetworkConfig& cfg, SchemeId scheme, std::uint64_t seed);

struct SweepResult {
  std::vector<ExperimentRecord> records;
};

// variable is one of P_max, b, M, N; values replace the corresponding config
// field per point. Drop d of every (scheme, value) pair shares seed base+d,
// so schemes see identical channels.
SweepResult sweep(const NetworkConfig& cfg, const std::vector<SchemeId>& schemes,
                  const std::string& variable, const std::vector<double>& values,
                  int drops, std::uint64_t seed, int workers = 1);

struct TrainEvalResult {
  // Per-episode training rows (scheme, episode, windowed mean rate, epsilon).
  std::vector<ExperimentRecord> training;
  // Per-interval online rows for qrdrl, qlearning, no_adapt.
  std::vector<ExperimentRecord> online;
  QuantileTable qr_table;
  QTable q_table;
  ActionSpace actions;
  double calibrated_e_th = 0.0;
  double online_mean_qrdrl = 0.0;
  double online_mean_qlearning = 0.0;
  double online_mean_no_adapt = 0.0;
};

struct TrainOptions {
  int episodes = 4000;
  int eval_intervals = 120;
  int reduce_samples = 500;
  int curve_window = 300;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.8;  // of episodes
  double qlearning_lr = 0.1;
  int calibration_drops = 40;
  int calibration_slots = 8;
};

// Trains both learners at one deployment (placement, shadowing, and the
// deployment-time channel estimate fixed by the seed; per-interval symbol and
// receiver noise vary), then runs frozen-table
// online intervals with epsilon = 0 against the no-adaptation baseline.
TrainEvalResult train_and_eval(const NetworkConfig& cfg, const TrainOptions& opts,
                               std::uint64_t seed);

struct OnlineResult {
  std::vector<ExperimentRecord> records;  // per interval per scheme
  double mean_qrdrl = 0.0;
  double mean_qlearning = 0.0;
  double mean_no_adapt = 0.0;
};

// Frozen-policy online intervals at the seed's deployment, paired noise across
// schemes. Null table pointers skip that learner; no_adapt always runs.
OnlineResult run_online(const NetworkConfig& cfg, const QuantileTable* qr,
                        const QTable* q, const ActionSpace& actions, double e_th,
                        int intervals, std::uint64_t seed);

// Brute-force per-drop optimal flip tally for action reduction. Runs the same
// estimate-then-optimize pipeline the learners face.
ActionFrequency sample_optimal_actions(const NetworkConfig& cfg, int samples,
                                       std::uint64_t seed, int workers = 1);

// Median deviation power under the identity flip, across calibration drops.
// The noise-floor percentile the state bits would otherwise use saturates as
// soon as estimation mismatch dominates noise, turning every state into
// all-ones; calibrating at the operating point keeps the bits informative.
double calibrate_deviation_threshold(const NetworkConfig& cfg, std::uint64_t seed,
                                     int drops, int slots_per_drop);

struct Aggregate {
  std::string scheme;
  double value = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  int count = 0;
};

std::vector<Aggregate> aggregate(const std::vector<ExperimentRecord>& records);

}  // namespace optlab
