#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "optlab/channel.hpp"
#include "optlab/scenario.hpp"
#include "test_util.hpp"

using namespace optlab;
using testutil::tiny_config;

TEST_CASE("array response trivial points") {
  const CVec a = array_response(0.0, M_PI / 2.0, 3, 2);
  REQUIRE(a.size() == 6);
  for (int i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - cplx(1.0, 0.0)) < 1e-12);
  const CVec one = array_response(1.1, 0.4, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0] - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("array response per-entry formula") {
  const double az = M_PI / 6.0, el = M_PI / 3.0;
  const CVec a = array_response(az, el, 2, 2);
  for (int v = 0; v < 2; ++v)
    for (int w = 0; w < 2; ++w) {
      const cplx want =
          std::exp(cplx(0.0, M_PI * (v * std::sin(az) * std::sin(el) + w * std::cos(el))));
      CHECK(std::abs(a[v * 2 + w] - want) < 1e-12);
    }
}

TEST_CASE("array response unit modulus") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int t = 0; t < 20; ++t) {
    const CVec a = array_response(u(rng), u(rng), 4, 4);
    for (int i = 0; i < a.size(); ++i) CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-12);
  }
}

TEST_CASE("path loss hand values") {
  std::mt19937_64 rng(1);
  const double pl1 = path_loss_db(1.0, 30.0, 0.0, rng);
  CHECK(pl1 == doctest::Approx(32.4 + 20.0 * std::log10(30.0)).epsilon(1e-12));
  const double pl10 = path_loss_db(10.0, 30.0, 0.0, rng);
  CHECK(pl10 == doctest::Approx(pl1 + 21.0).epsilon(1e-12));
  // custom exponent variant
  const double plexp = path_loss_db(10.0, 30.0, 3.19, 0.0, rng);
  CHECK(plexp == doctest::Approx(32.4 + 31.9 + 20.0 * std::log10(30.0)).epsilon(1e-12));
}

TEST_CASE("path loss zero shadowing is deterministic") {
  std::mt19937_64 r1(11), r2(99);
  CHECK(path_loss_db(40.0, 30.0, 0.0, r1) == path_loss_db(40.0, 30.0, 0.0, r2));
}

TEST_CASE("path loss shadowing has the configured spread") {
  std::mt19937_64 rng(3);
  const double base = [] {
    std::mt19937_64 r(0);
    return path_loss_db(40.0, 30.0, 0.0, r);
  }();
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double xi = path_loss_db(40.0, 30.0, 3.762, rng) - base;
    s += xi;
    s2 += xi * xi;
  }
  const double var = s2 / n - (s / n) * (s / n);
  CHECK(std::abs(std::sqrt(var) - 3.762) < 0.1);
  CHECK(std::abs(s / n) < 0.1);
}

TEST_CASE("path loss rejects bad arguments") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(path_loss_db(0.0, 30.0, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(10.0, -1.0, 0.0, rng), std::invalid_argument);
}

static Geometry default_geometry(std::uint64_t seed, int K) {
  NetworkConfig cfg;
  cfg.num_ues = K;
  const auto ues = sample_ue_positions(seed, cfg);
  return derive_geometry(cfg.bs_position, cfg.ir_position, ues);
}

TEST_CASE("bs-ir link is rank one with unit-modulus entries") {
  const Geometry geo = default_geometry(21, 2);
  const CMat H = build_bs_ir_channel(geo, 16, 16);
  REQUIRE(H.rows() == 16);
  REQUIRE(H.cols() == 16);
  CHECK(H.norm() == doctest::Approx(std::sqrt(256.0)).epsilon(1e-12));
  Eigen::JacobiSVD<CMat> svd(H);
  CHECK(svd.singularValues()(1) < 1e-9 * svd.singularValues()(0));
}

TEST_CASE("bs-ir link matches the explicit outer product") {
  const Geometry geo = default_geometry(33, 1);
  const int M = 4, N = 9;
  const CMat H = build_bs_ir_channel(geo, M, N);
  const CVec ar = array_response(geo.ir_arrival.azimuth, geo.ir_arrival.elevation, 3, 3);
  const CVec at = array_response(geo.bs_departure.azimuth, geo.bs_departure.elevation, 2, 2);
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m)
      CHECK(std::abs(H(n, m) - ar[n] * std::conj(at[m])) < 1e-12);
}

TEST_CASE("cascaded channels per-entry oracle") {
  NetworkConfig cfg = tiny_config();
  const auto ues = sample_ue_positions(9, cfg);
  const Geometry geo = derive_geometry(cfg.bs_position, cfg.ir_position, ues);
  std::mt19937_64 shadow = make_rng(7, Stream::Shadowing, 0);
  const ChannelSet ch = build_cascaded_channels(geo, cfg, shadow);
  REQUIRE(static_cast<int>(ch.true_G.size()) == cfg.num_ues);

  const int N = cfg.num_ir_elements, M = cfg.num_bs_antennas;
  const int side = 2;
  const CMat H = build_bs_ir_channel(geo, M, N);
  for (int k = 0; k < cfg.num_ues; ++k) {
    const CVec h =
        array_response(geo.ir_departure[k].azimuth, geo.ir_departure[k].elevation, side, side);
    const cplx scale = std::exp(cplx(0.0, -2.0 * M_PI * ch.distance[k] / ch.wavelength)) /
                       std::sqrt(ch.path_loss_lin[k]);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m)
        CHECK(std::abs(ch.true_G[k](n, m) - scale * h[n] * H(n, m)) < 1e-12 * std::abs(scale));
  }
}

TEST_CASE("cascaded channel magnitudes follow the path loss") {
  NetworkConfig cfg = tiny_config();
  const ChannelSet ch = testutil::random_channels(cfg, 31);
  for (std::size_t k = 0; k < ch.true_G.size(); ++k) {
    const double want = 1.0 / std::sqrt(ch.path_loss_lin[k]);
    for (int n = 0; n < ch.true_G[k].rows(); ++n)
      for (int m = 0; m < ch.true_G[k].cols(); ++m)
        CHECK(std::abs(ch.true_G[k](n, m)) == doctest::Approx(want).epsilon(1e-9));
    Eigen::JacobiSVD<CMat> svd(ch.true_G[k]);
    CHECK(svd.singularValues()(1) < 1e-9 * svd.singularValues()(0));
  }
}

TEST_CASE("effective rows are the phase-weighted row sums") {
  const ChannelSet ch = testutil::synthetic_channels(2, 3, 2, 17);
  const CVec phi = testutil::random_phases(3, 4);
  const CMat rows = effective_rows(phi, ch.true_G);
  REQUIRE(rows.rows() == 2);
  REQUIRE(rows.cols() == 2);
  for (int k = 0; k < 2; ++k) {
    CVec want = CVec::Zero(2);
    for (int n = 0; n < 3; ++n)
      for (int m = 0; m < 2; ++m) want[m] += phi[n] * ch.true_G[k](n, m);
    CHECK((rows.row(k).transpose() - want).norm() < 1e-12 * want.norm());
  }
}

TEST_CASE("sinr single-user closed form") {
  const ChannelSet ch = testutil::synthetic_channels(1, 3, 2, 55);
  const CVec phi = testutil::random_phases(3, 6);
  const CMat W = testutil::random_precoder(2, 1, 1.0, 8);
  const double sigma2 = 0.37;
  const cplx s = (effective_rows(phi, ch.true_G).row(0) * W.col(0))(0);
  CHECK(sinr(W, phi, ch, sigma2, 0) ==
        doctest::Approx(std::norm(s) / sigma2).epsilon(1e-12));
}

TEST_CASE("sinr zero precoder column") {
  const ChannelSet ch = testutil::synthetic_channels(2, 3, 2, 56);
  const CVec phi = testutil::random_phases(3, 7);
  CMat W = testutil::random_precoder(2, 2, 1.0, 9);
  W.col(0).setZero();
  CHECK(sinr(W, phi, ch, 0.25, 0) == 0.0);
}

TEST_CASE("sinr matches the scalar expansion") {
  const ChannelSet ch = testutil::synthetic_channels(2, 2, 2, 57);
  const CVec phi = testutil::random_phases(2, 10);
  const CMat W = testutil::random_precoder(2, 2, 2.0, 11);
  const double sigma2 = 0.11;
  for (int k = 0; k < 2; ++k) {
    // scalar expansion of |sum_n sum_m phi_n G(n,m) W(m,i)|^2 terms
    cplx sk = 0.0, si = 0.0;
    const int other = 1 - k;
    for (int n = 0; n < 2; ++n)
      for (int m = 0; m < 2; ++m) {
        sk += phi[n] * ch.true_G[k](n, m) * W(m, k);
        si += phi[n] * ch.true_G[k](n, m) * W(m, other);
      }
    const double want = std::norm(sk) / (std::norm(si) + sigma2);
    CHECK(sinr(W, phi, ch, sigma2, k) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("sinr scale law for one user") {
  const ChannelSet ch = testutil::synthetic_channels(1, 3, 2, 58);
  const CVec phi = testutil::random_phases(3, 12);
  const CMat W = testutil::random_precoder(2, 1, 1.0, 13);
  const double base = sinr(W, phi, ch, 0.2, 0);
  const CMat W3 = W * cplx(1.2, -0.7);
  CHECK(sinr(W3, phi, ch, 0.2, 0) ==
        doctest::Approx(base * std::norm(cplx(1.2, -0.7))).epsilon(1e-9));
}

TEST_CASE("sinr shape mismatch") {
  const ChannelSet ch = testutil::synthetic_channels(1, 3, 2, 59);
  const CVec phi = testutil::random_phases(4, 14);  // wrong N
  const CMat W = testutil::random_precoder(2, 1, 1.0, 15);
  CHECK_THROWS_AS(sinr(W, phi, ch, 0.1, 0), std::invalid_argument);
}

TEST_CASE("sum rate zero precoder and unit-SINR point") {
  const ChannelSet ch = testutil::synthetic_channels(1, 3, 2, 60);
  const CVec phi = testutil::random_phases(3, 16);
  const double b = 2e6, sigma2 = 0.4;
  CHECK(sum_rate(CMat::Zero(2, 1), phi, ch, b, sigma2) == 0.0);
  CMat W = testutil::random_precoder(2, 1, 1.0, 17);
  W /= std::sqrt(sinr(W, phi, ch, sigma2, 0));  // eta scales to exactly 1
  CHECK(sum_rate(W, phi, ch, b, sigma2) == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("sum rate composes per-user sinr calls") {
  const ChannelSet ch = testutil::synthetic_channels(4, 4, 4, 61);
  const CVec phi = testutil::random_phases(4, 18);
  const CMat W = testutil::random_precoder(4, 4, 3.0, 19);
  const double b = 2e6, sigma2 = 0.09;
  double want = 0.0;
  for (int k = 0; k < 4; ++k) want += b * std::log2(1.0 + sinr(W, phi, ch, sigma2, k));
  CHECK(sum_rate(W, phi, ch, b, sigma2) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("global reflection phase cancels in every sinr") {
  const ChannelSet ch = testutil::synthetic_channels(3, 4, 3, 62);
  const CVec phi = testutil::random_phases(4, 20);
  const CMat W = testutil::random_precoder(3, 3, 2.0, 21);
  const CVec rot = phi * std::polar(1.0, 1.234);
  for (int k = 0; k < 3; ++k)
    CHECK(sinr(W, phi, ch, 0.15, k) ==
          doctest::Approx(sinr(W, rot, ch, 0.15, k)).epsilon(1e-12));
}

TEST_CASE("time-average overhead factors") {
  NetworkConfig cfg;  // N=16, tau=0.1, tau_c=0.001, tau_m=0, L=10 -> T=1
  const double r = 1e6;
  CHECK(time_avg_rate(r, OverheadScheme::IrOptimized, cfg) ==
        doctest::Approx(0.984 * r).epsilon(1e-12));
  CHECK(time_avg_rate(r, OverheadScheme::FixedIr, cfg) ==
        doctest::Approx(0.999 * r).epsilon(1e-12));
  CHECK(time_avg_rate(r, OverheadScheme::Direct, cfg) ==
        doctest::Approx(0.999 * r).epsilon(1e-12));

  NetworkConfig big = cfg;
  big.num_ir_elements = 100;
  CHECK(time_avg_rate(r, OverheadScheme::IrOptimized, big) ==
        doctest::Approx(0.9 * r).epsilon(1e-12));

  NetworkConfig free = cfg;
  free.pilot_subphase = 0.0;
  free.processing_time = 0.0;
  CHECK(time_avg_rate(r, OverheadScheme::IrOptimized, free) == r);
  CHECK(time_avg_rate(r, OverheadScheme::Direct, free) == r);
}

TEST_CASE("time-average overhead ordering and error") {
  NetworkConfig cfg;
  const double r = 5e5;
  // sounding all N elements always costs more than one sub-phase for N > 1
  CHECK(time_avg_rate(r, OverheadScheme::IrOptimized, cfg) <
        time_avg_rate(r, OverheadScheme::FixedIr, cfg));
  NetworkConfig bad = cfg;
  bad.pilot_subphase = 0.1;  // N tau_c covers the full interval
  CHECK_THROWS_AS(time_avg_rate(r, OverheadScheme::IrOptimized, bad), std::invalid_argument);
}
