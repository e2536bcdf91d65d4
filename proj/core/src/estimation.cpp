#include "optlab/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace optlab {

EstimationReport run_pilot_phase(const ChannelSet& ch, double p_c_watts,
                                 double sigma_bs2_watts, std::mt19937_64& rng) {
  if (p_c_watts <= 0.0) throw std::invalid_argument("run_pilot_phase: pilot power must be > 0");
  const int K = static_cast<int>(ch.true_G.size());
  if (K == 0) throw std::invalid_argument("run_pilot_phase: empty channel set");
  const Eigen::Index N = ch.true_G[0].rows();
  const Eigen::Index M = ch.true_G[0].cols();

  EstimationReport rep;
  rep.theoretical_mse = static_cast<double>(N) * static_cast<double>(M) *
                        sigma_bs2_watts / p_c_watts;
  const double err_sd = std::sqrt(sigma_bs2_watts / p_c_watts);

  // One element ON per sub-phase; orthogonal pilots give each row an
  // independent error of per-entry variance sigma_BS^2 / p_c.
  for (int k = 0; k < K; ++k) {
    CMat est = ch.true_G[k];
    double sq = 0.0;
    if (sigma_bs2_watts > 0.0) {
      for (Eigen::Index n = 0; n < N; ++n) {
        for (Eigen::Index m = 0; m < M; ++m) {
          const cplx e = err_sd * circular_gaussian(rng);
          est(n, m) += e;
          sq += std::norm(e);
        }
      }
    }
    rep.est_G.push_back(std::move(est));
    rep.squared_error.push_back(sq);
  }
  return rep;
}

TimingBudget timing_budget(const NetworkConfig& cfg) {
  TimingBudget t;
  t.slot = cfg.slot_duration;
  t.pilot_total = cfg.num_ir_elements * cfg.pilot_subphase;
  t.processing = cfg.processing_time;
  t.transmit_first_slot = t.slot - t.pilot_total - t.processing;
  if (t.transmit_first_slot < 0.0)
    throw std::invalid_argument("timing_budget: training overhead exceeds one slot");
  t.interval = cfg.interval_duration();
  t.effective = t.interval - t.pilot_total - t.processing;
  t.per_slot.assign(cfg.slots_per_interval, t.slot);
  if (!t.per_slot.empty()) t.per_slot[0] = t.transmit_first_slot;
  return t;
}

cplx received_signal(const CVec& phi, const CMat& G_k, const CMat& W,
                     const CVec& symbols, double sigma2, std::mt19937_64& rng) {
  if (phi.size() != G_k.rows() || G_k.cols() != W.rows() || W.cols() != symbols.size())
    throw std::invalid_argument("received_signal: shape mismatch");
  const cplx clean = (phi.transpose() * G_k * (W * symbols))(0);
  const cplx z = sigma2 > 0.0 ? std::sqrt(sigma2) * circular_gaussian(rng) : cplx(0.0);
  return clean + z;
}

CMat project_onto_bs_direction(const CMat& G_hat, const CVec& bs_steering) {
  if (G_hat.cols() != bs_steering.size())
    throw std::invalid_argument("project_onto_bs_direction: shape mismatch");
  const double M = static_cast<double>(bs_steering.size());
  const CVec c_hat = G_hat * bs_steering / M;
  return c_hat * bs_steering.adjoint();
}

DeviationState compute_state(const CVec& y, const CVec& y_hat, double e_th) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("compute_state: length mismatch");
  if (e_th <= 0.0) throw std::invalid_argument("compute_state: threshold must be > 0");
  DeviationState s;
  s.bits.resize(y.size());
  for (int k = 0; k < y.size(); ++k) {
    const bool dev = std::norm(y[k] - y_hat[k]) > e_th;
    s.bits[k] = dev;
    if (dev) s.index |= 1u << k;
  }
  return s;
}

}  // namespace optlab
