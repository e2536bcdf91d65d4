#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "optlab/types.hpp"

namespace optlab {

// All tunables of a simulated deployment. Angles, channels, and timing are
// derived from these; everything downstream treats the struct as immutable.
struct NetworkConfig {
  int num_bs_antennas = 16;   // M, square number (uniform planar array)
  int num_ir_elements = 16;   // N, square number
  int num_ues = 4;            // K

  double bandwidth = 2.0e6;        // Hz
  double carrier_freq = 30.0e9;    // Hz
  double noise_psd_ue = -174.0;    // dBm/Hz, sigma^2 = psd * b
  double noise_psd_bs = -170.0;    // dBm/Hz, sigma_BS^2 = psd * b
  double bs_power_max = 40.0;      // dBm
  double ue_pilot_power = 10.0;    // dBm

  double slot_duration = 0.1;      // tau, seconds
  int slots_per_interval = 10;     // L
  double pilot_subphase = 0.001;   // tau_c, seconds
  double processing_time = 0.0;    // tau_m, seconds

  double discount = 0.9;           // gamma
  int num_quantiles = 40;          // Q
  double deviation_threshold = 0.0;  // E_th in Watts; <= 0 requests calibration
  int reduced_action_count = 60;   // A

  // Geometry defaults; UE (x,y) drawn from N((ue_center_x, ue_center_y), ue_pos_var I).
  Vec3 bs_position{0.0, 0.0, 25.0};
  Vec3 ir_position{0.0, 20.0, 30.0};
  double ue_center_x = 0.0;
  double ue_center_y = 20.0;
  double ue_pos_var = 5.0;

  double shadowing_sigma_los_db = 3.762;
  double shadowing_sigma_nlos_db = 8.092;

  // Direct BS-UE link: NLOS distance exponent (path loss 32.4 + 10*n*log10 d
  // + 20 log10 f_GHz) plus a fixed blockage penalty.
  double direct_pl_exponent = 3.19;
  double direct_extra_loss_db = 30.0;

  double noise_ue_watts() const { return dbm_to_watts(noise_psd_ue) * bandwidth; }
  double noise_bs_watts() const { return dbm_to_watts(noise_psd_bs) * bandwidth; }
  double bs_power_watts() const { return dbm_to_watts(bs_power_max); }
  double pilot_power_watts() const { return dbm_to_watts(ue_pilot_power); }
  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double interval_duration() const { return slots_per_interval * slot_duration; }

  // Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

// Flat "key = value" file, '#' starts a comment. Unknown keys are an error.
NetworkConfig load_config(const std::string& path);
NetworkConfig parse_config(const std::string& text);
std::string dump_config(const NetworkConfig& cfg);

bool is_square_number(int n);

}  // namespace optlab
