#pragma once

#include <cstdint>
#include <vector>

#include "optlab/channel.hpp"
#include "optlab/config.hpp"
#include "optlab/rng.hpp"
#include "optlab/types.hpp"

namespace optlab {

struct TimingBudget {
  double slot = 0.0;                // tau
  double pilot_total = 0.0;         // N * tau_c
  double processing = 0.0;          // tau_m
  double transmit_first_slot = 0.0; // tau_d = tau - N tau_c - tau_m
  double interval = 0.0;            // T = L tau
  double effective = 0.0;           // T_d = T - N tau_c - tau_m
  std::vector<double> per_slot;     // [tau_d, tau, ..., tau], length L
};

struct EstimationReport {
  std::vector<CMat> est_G;            // K matrices, N x M
  std::vector<double> squared_error;  // per-UE ||est - true||_F^2
  double theoretical_mse = 0.0;       // N M sigma_BS^2 / p_c
};

// One element reflecting per sub-phase; per-entry error CN(0, sigma_BS^2 / p_c),
// independent across elements, antennas, and UEs.
EstimationReport run_pilot_phase(const ChannelSet& ch, double p_c_watts,
                                 double sigma_bs2_watts, std::mt19937_64& rng);

TimingBudget timing_budget(const NetworkConfig& cfg);

// y_k = phi G_k (W beta) + z, z ~ CN(0, sigma2).
cplx received_signal(const CVec& phi, const CMat& G_k, const CMat& W,
                     const CVec& symbols, double sigma2, std::mt19937_64& rng);

// Collapse a noisy estimate back onto the known BS-side steering direction:
// c_hat = G_hat a / M, result c_hat a^H. The BS-IR geometry is static, so the
// direction is known at the BS; without this step the estimate is full rank
// and the precoder chases directions that exist only in estimation noise.
CMat project_onto_bs_direction(const CMat& G_hat, const CVec& bs_steering);

struct DeviationState {
  std::uint32_t index = 0;          // bit k set iff UE k deviates
  std::vector<bool> bits;
};

// bit k = 1 iff |y_k - y_hat_k|^2 > E_th.
DeviationState compute_state(const CVec& y, const CVec& y_hat, double e_th);

}  // namespace optlab
