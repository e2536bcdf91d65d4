#include "optlab/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace optlab {

CVec array_response(double azimuth, double elevation, int V, int W) {
  if (V < 1 || W < 1) throw std::invalid_argument("array_response: V, W must be >= 1");
  CVec out(static_cast<Eigen::Index>(V) * W);
  const double sv = std::sin(azimuth) * std::sin(elevation);
  const double cw = std::cos(elevation);
  Eigen::Index idx = 0;
  for (int v = 0; v < V; ++v) {
    for (int w = 0; w < W; ++w) {
      const double phase = std::numbers::pi * (v * sv + w * cw);
      out[idx++] = std::polar(1.0, phase);
    }
  }
  return out;
}

double path_loss_db(double d_meters, double f_ghz, double exponent_n,
                    double sigma_sf, std::mt19937_64& rng) {
  if (d_meters <= 0.0 || f_ghz <= 0.0)
    throw std::invalid_argument("path_loss_db: distance and frequency must be > 0");
  const double xi = sigma_sf > 0.0 ? sigma_sf * gaussian(rng) : 0.0;
  return 32.4 + 10.0 * exponent_n * std::log10(d_meters) + 20.0 * std::log10(f_ghz) + xi;
}

double path_loss_db(double d_meters, double f_ghz, double sigma_sf,
                    std::mt19937_64& rng) {
  return path_loss_db(d_meters, f_ghz, 2.1, sigma_sf, rng);
}

CMat build_bs_ir_channel(const Geometry& geo, int M, int N) {
  const int sm = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
  const int sn = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
  const CVec a_r = array_response(geo.ir_arrival.azimuth, geo.ir_arrival.elevation, sn, sn);
  const CVec a_t = array_response(geo.bs_departure.azimuth, geo.bs_departure.elevation, sm, sm);
  return a_r * a_t.adjoint();
}

ChannelSet build_cascaded_channels(const Geometry& geo, const NetworkConfig& cfg,
                                   std::mt19937_64& shadowing_rng) {
  const int M = cfg.num_bs_antennas;
  const int N = cfg.num_ir_elements;
  const int K = static_cast<int>(geo.ue_positions.size());
  const int sm = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
  const int sn = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
  const double f_ghz = cfg.carrier_freq / 1e9;

  ChannelSet ch;
  ch.wavelength = cfg.wavelength();
  ch.bs_steering = array_response(geo.bs_departure.azimuth, geo.bs_departure.elevation, sm, sm);
  const CMat H = build_bs_ir_channel(geo, M, N);

  for (int k = 0; k < K; ++k) {
    const double d = geo.cascade_distance[k];
    const double pl_db = path_loss_db(d, f_ghz, 2.1, cfg.shadowing_sigma_los_db,
                                      shadowing_rng);
    const double pl = db_to_lin(pl_db);
    const cplx scale = std::polar(1.0 / std::sqrt(pl),
                                  -2.0 * std::numbers::pi * d / ch.wavelength);
    const CVec h_k = array_response(geo.ir_departure[k].azimuth,
                                    geo.ir_departure[k].elevation, sn, sn);
    CMat G = H;
    for (int n = 0; n < N; ++n) G.row(n) *= scale * h_k[n];
    ch.true_G.push_back(std::move(G));
    ch.path_loss_lin.push_back(pl);
    ch.distance.push_back(d);
  }
  return ch;
}

DirectChannelSet build_direct_channels(const Geometry& geo, const NetworkConfig& cfg,
                                       std::mt19937_64& shadowing_rng) {
  const int M = cfg.num_bs_antennas;
  const int K = static_cast<int>(geo.ue_positions.size());
  const int sm = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
  const double f_ghz = cfg.carrier_freq / 1e9;

  DirectChannelSet out;
  out.rows.resize(K, M);
  for (int k = 0; k < K; ++k) {
    const double d = geo.direct_distance[k];
    const double pl_db = path_loss_db(d, f_ghz, cfg.direct_pl_exponent,
                                      cfg.shadowing_sigma_nlos_db, shadowing_rng) +
                         cfg.direct_extra_loss_db;
    const double pl = db_to_lin(pl_db);
    const cplx scale = std::polar(1.0 / std::sqrt(pl),
                                  -2.0 * std::numbers::pi * d / cfg.wavelength());
    const CVec a = array_response(geo.bs_to_ue[k].azimuth, geo.bs_to_ue[k].elevation,
                                  sm, sm);
    out.rows.row(k) = scale * a.transpose();
    out.path_loss_lin.push_back(pl);
    out.distance.push_back(d);
  }
  return out;
}

CMat effective_rows(const CVec& phi, const std::vector<CMat>& G) {
  const int K = static_cast<int>(G.size());
  if (K == 0) throw std::invalid_argument("effective_rows: empty channel set");
  const Eigen::Index M = G[0].cols();
  if (phi.size() != G[0].rows()) throw std::invalid_argument("effective_rows: phi length mismatch");
  CMat rows(K, M);
  for (int k = 0; k < K; ++k) rows.row(k) = phi.transpose() * G[k];
  return rows;
}

double sinr_rows(const CMat& rows, const CMat& W, double sigma2, int k) {
  if (rows.cols() != W.rows()) throw std::invalid_argument("sinr: shape mismatch");
  if (k < 0 || k >= rows.rows()) throw std::invalid_argument("sinr: bad UE index");
  const CVec s = (rows.row(k) * W).transpose();
  const double desired = std::norm(s[k]);
  double interference = 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (i != k) interference += std::norm(s[i]);
  return desired / (interference + sigma2);
}

double sum_rate_rows(const CMat& rows, const CMat& W, double b, double sigma2) {
  double total = 0.0;
  for (int k = 0; k < rows.rows(); ++k)
    total += std::log2(1.0 + sinr_rows(rows, W, sigma2, k));
  return b * total;
}

double sinr(const CMat& W, const CVec& phi, const ChannelSet& ch, double sigma2, int k) {
  return sinr_rows(effective_rows(phi, ch.true_G), W, sigma2, k);
}

double sum_rate(const CMat& W, const CVec& phi, const ChannelSet& ch,
                double b, double sigma2) {
  return sum_rate_rows(effective_rows(phi, ch.true_G), W, b, sigma2);
}

double time_avg_rate(double rate, OverheadScheme scheme, const NetworkConfig& cfg) {
  const double T = cfg.interval_duration();
  const double overhead = scheme == OverheadScheme::IrOptimized
                              ? cfg.num_ir_elements * cfg.pilot_subphase + cfg.processing_time
                              : cfg.pilot_subphase + cfg.processing_time;
  if (overhead >= T) throw std::invalid_argument("time_avg_rate: overhead exceeds interval");
  return rate * (1.0 - overhead / T);
}

}  // namespace optlab
