#pragma once

#include <optional>
#include <vector>

#include "optlab/config.hpp"
#include "optlab/rng.hpp"
#include "optlab/scenario.hpp"
#include "optlab/types.hpp"

namespace optlab {

// Per-UE reflected channels plus the quantities needed to rebuild or rescale
// them. est_G is filled by the estimation stage when present.
struct ChannelSet {
  std::vector<CMat> true_G;             // K matrices, N x M
  std::optional<std::vector<CMat>> est_G;
  std::vector<double> path_loss_lin;    // linear power ratio per UE
  std::vector<double> distance;         // meters per UE (through the reflector)
  double wavelength = 0.0;
  CVec bs_steering;                     // M-vector, BS side of the rank-one link
};

// Direct BS-UE rows for the reflector-free baseline, one 1 x M row per UE.
struct DirectChannelSet {
  CMat rows;                         // K x M
  std::vector<double> path_loss_lin;
  std::vector<double> distance;
};

// Entry (v, w), v in [0,V), w in [0,W): exp(j pi (v sin(az) sin(el) + w cos(el))).
// Unit modulus, no normalization factor.
CVec array_response(double azimuth, double elevation, int V, int W);

// 32.4 + 21 log10(d) + 20 log10(f_GHz) + xi, xi ~ N(0, sigma_sf^2) real dB.
double path_loss_db(double d_meters, double f_ghz, double sigma_sf,
                    std::mt19937_64& rng);
// Same law with a configurable distance exponent 10*n*log10(d).
double path_loss_db(double d_meters, double f_ghz, double exponent_n,
                    double sigma_sf, std::mt19937_64& rng);

// Rank-one N x M product of the two planar-array responses.
CMat build_bs_ir_channel(const Geometry& geo, int M, int N);

ChannelSet build_cascaded_channels(const Geometry& geo, const NetworkConfig& cfg,
                                   std::mt19937_64& shadowing_rng);

DirectChannelSet build_direct_channels(const Geometry& geo, const NetworkConfig& cfg,
                                       std::mt19937_64& shadowing_rng);

// Effective 1 x M row per UE: phi^T diag-applied to G_k, i.e. sum_n phi_n G_k(n, :).
CMat effective_rows(const CVec& phi, const std::vector<CMat>& G);

double sinr(const CMat& W, const CVec& phi, const ChannelSet& ch, double sigma2, int k);
double sum_rate(const CMat& W, const CVec& phi, const ChannelSet& ch,
                double b, double sigma2);

// Row-based forms shared by the reflected and direct paths.
double sinr_rows(const CMat& rows, const CMat& W, double sigma2, int k);
double sum_rate_rows(const CMat& rows, const CMat& W, double b, double sigma2);

enum class OverheadScheme { IrOptimized, FixedIr, Direct };

// Training-overhead discount: (1 - (N tau_c + tau_m)/T) for the reflector
// scheme that sounds all N elements, (1 - (tau_c + tau_m)/T) otherwise.
double time_avg_rate(double rate, OverheadScheme scheme, const NetworkConfig& cfg);

}  // namespace optlab
