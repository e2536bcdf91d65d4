#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "optlab/config.hpp"
#include "optlab/scenario.hpp"

using namespace optlab;

TEST_CASE("config defaults validate") {
  NetworkConfig cfg;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config rejects non-square arrays") {
  NetworkConfig cfg;
  cfg.num_bs_antennas = 15;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.num_ir_elements = 10;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config rejects training overflow of the slot") {
  NetworkConfig cfg;
  cfg.pilot_subphase = cfg.slot_duration / cfg.num_ir_elements;  // N tau_c == tau
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config rejects out-of-range scalars") {
  NetworkConfig cfg;
  cfg.discount = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.num_quantiles = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.bandwidth = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config file round trip") {
  NetworkConfig cfg;
  cfg.num_ir_elements = 36;
  cfg.bs_power_max = 25.5;
  cfg.ue_center_y = 17.0;
  const NetworkConfig back = parse_config(dump_config(cfg));
  CHECK(back.num_ir_elements == 36);
  CHECK(back.bs_power_max == doctest::Approx(25.5).epsilon(1e-12));
  CHECK(back.ue_center_y == doctest::Approx(17.0).epsilon(1e-12));
  CHECK(back.num_bs_antennas == cfg.num_bs_antennas);
}

TEST_CASE("config parser reports bad input") {
  CHECK_THROWS_AS(parse_config("not_a_key = 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("bandwidth == 3\n"), std::invalid_argument);
  CHECK_NOTHROW(parse_config("# comment only\n\n"));
}

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(db_to_lin(0.0) == doctest::Approx(1.0));
  CHECK(watts_to_dbm(dbm_to_watts(17.3)) == doctest::Approx(17.3).epsilon(1e-12));
  NetworkConfig cfg;
  // -174 dBm/Hz over 2 MHz
  CHECK(cfg.noise_ue_watts() ==
        doctest::Approx(std::pow(10.0, -17.4) * 1e-3 * 2e6).epsilon(1e-12));
}

TEST_CASE("ue sampling basic shape") {
  const auto pts = sample_ue_positions(42, 4, 0.0, 20.0, 5.0);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) CHECK(p.z() == 0.0);
  const auto again = sample_ue_positions(42, 4, 0.0, 20.0, 5.0);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK((pts[i] - again[i]).norm() == 0.0);
  CHECK_THROWS_AS(sample_ue_positions(42, 0, 0.0, 20.0, 5.0), std::invalid_argument);
}

TEST_CASE("ue sampling mean over many repeats") {
  double sx = 0.0, sy = 0.0;
  const int reps = 100000;
  for (int i = 0; i < reps; ++i) {
    const auto p = sample_ue_positions(1000 + i, 1, 0.0, 20.0, 5.0);
    sx += p[0].x();
    sy += p[0].y();
  }
  CHECK(std::abs(sx / reps) < 0.05);
  CHECK(std::abs(sy / reps - 20.0) < 0.05);
}

TEST_CASE("ue sampling covariance") {
  const auto pts = sample_ue_positions(7, 100000, 0.0, 20.0, 5.0);
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x();
    my += p.y();
  }
  mx /= pts.size();
  my /= pts.size();
  double cxx = 0.0, cyy = 0.0, cxy = 0.0;
  for (const auto& p : pts) {
    cxx += (p.x() - mx) * (p.x() - mx);
    cyy += (p.y() - my) * (p.y() - my);
    cxy += (p.x() - mx) * (p.y() - my);
  }
  cxx /= pts.size();
  cyy /= pts.size();
  cxy /= pts.size();
  const double fro_err = std::sqrt((cxx - 5.0) * (cxx - 5.0) +
                                   (cyy - 5.0) * (cyy - 5.0) + 2.0 * cxy * cxy);
  const double fro_ref = std::sqrt(2.0) * 5.0;
  CHECK(fro_err / fro_ref < 0.02);
}

TEST_CASE("geometry distances by hand") {
  const Vec3 bs(0.0, 0.0, 25.0), ir(0.0, 20.0, 30.0), ue(0.0, 20.0, 0.0);
  const Geometry geo = derive_geometry(bs, ir, {ue});
  CHECK(geo.cascade_distance[0] ==
        doctest::Approx(std::sqrt(400.0 + 25.0) + 30.0).epsilon(1e-12));
  CHECK(geo.direct_distance[0] ==
        doctest::Approx(std::sqrt(400.0 + 625.0)).epsilon(1e-12));
  // IR straight above the UE: departure points along -z.
  CHECK(geo.ir_departure[0].elevation == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("geometry angles recompute to unit directions") {
  const Vec3 bs(0.0, 0.0, 25.0), ir(3.0, 20.0, 30.0), ue(5.0, 14.0, 0.0);
  const Geometry geo = derive_geometry(bs, ir, {ue});
  const auto check_dir = [](const AnglePair& a, const Vec3& from, const Vec3& to) {
    const Vec3 u = (to - from).normalized();
    const Vec3 r(std::sin(a.elevation) * std::cos(a.azimuth),
                 std::sin(a.elevation) * std::sin(a.azimuth), std::cos(a.elevation));
    CHECK((u - r).norm() < 1e-9);
  };
  check_dir(geo.bs_departure, bs, ir);
  check_dir(geo.ir_arrival, ir, bs);
  check_dir(geo.ir_departure[0], ir, ue);
  check_dir(geo.bs_to_ue[0], bs, ue);
}

TEST_CASE("geometry permutation equivariance and purity") {
  const Vec3 bs(0.0, 0.0, 25.0), ir(0.0, 20.0, 30.0);
  const Vec3 u1(2.0, 18.0, 0.0), u2(-4.0, 22.0, 0.0);
  const Geometry a = derive_geometry(bs, ir, {u1, u2});
  const Geometry b = derive_geometry(bs, ir, {u2, u1});
  CHECK(a.ir_departure[0].azimuth == b.ir_departure[1].azimuth);
  CHECK(a.ir_departure[0].elevation == b.ir_departure[1].elevation);
  CHECK(a.cascade_distance[0] == b.cascade_distance[1]);
  const Geometry a2 = derive_geometry(bs, ir, {u1, u2});
  CHECK(a.ir_departure[1].azimuth == a2.ir_departure[1].azimuth);
  CHECK(a.direct_distance == a2.direct_distance);
}

TEST_CASE("geometry rejects coincident endpoints") {
  const Vec3 p(0.0, 0.0, 25.0);
  CHECK_THROWS_AS(derive_geometry(p, p, {Vec3(1.0, 1.0, 0.0)}), std::invalid_argument);
  CHECK_THROWS_AS(derive_geometry(p, Vec3(0.0, 20.0, 30.0), {Vec3(0.0, 20.0, 30.0)}),
                  std::invalid_argument);
}
