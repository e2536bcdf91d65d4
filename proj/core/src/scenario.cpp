#include "optlab/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace optlab {

AnglePair direction_angles(const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  const double r = d.norm();
  if (r <= 0.0) throw std::invalid_argument("direction_angles: coincident points");
  AnglePair out;
  out.azimuth = std::atan2(d.y(), d.x());
  out.elevation = std::acos(d.z() / r);
  return out;
}

std::vector<Vec3> sample_ue_positions(std::uint64_t seed, int K,
                                      double cx, double cy, double var) {
  if (K < 1) throw std::invalid_argument("sample_ue_positions: K must be >= 1");
  auto rng = make_rng(seed, Stream::Placement, 0);
  const double sd = std::sqrt(var);
  std::vector<Vec3> out;
  out.reserve(K);
  for (int k = 0; k < K; ++k) {
    const double x = cx + sd * gaussian(rng);
    const double y = cy + sd * gaussian(rng);
    out.emplace_back(x, y, 0.0);
  }
  return out;
}

std::vector<Vec3> sample_ue_positions(std::uint64_t seed, const NetworkConfig& cfg) {
  return sample_ue_positions(seed, cfg.num_ues, cfg.ue_center_x, cfg.ue_center_y,
                             cfg.ue_pos_var);
}

Geometry derive_geometry(const Vec3& bs, const Vec3& ir,
                         const std::vector<Vec3>& ues) {
  if ((ir - bs).norm() <= 0.0)
    throw std::invalid_argument("derive_geometry: BS and IR coincide");
  Geometry geo;
  geo.bs_position = bs;
  geo.ir_position = ir;
  geo.ue_positions = ues;
  geo.bs_departure = direction_angles(bs, ir);
  geo.ir_arrival = direction_angles(ir, bs);
  const double bs_ir = (ir - bs).norm();
  geo.ir_departure.reserve(ues.size());
  geo.bs_to_ue.reserve(ues.size());
  geo.cascade_distance.reserve(ues.size());
  geo.direct_distance.reserve(ues.size());
  for (const Vec3& ue : ues) {
    if ((ue - ir).norm() <= 0.0)
      throw std::invalid_argument("derive_geometry: UE coincides with IR");
    geo.ir_departure.push_back(direction_angles(ir, ue));
    geo.bs_to_ue.push_back(direction_angles(bs, ue));
    geo.cascade_distance.push_back(bs_ir + (ue - ir).norm());
    geo.direct_distance.push_back((ue - bs).norm());
  }
  return geo;
}

}  // namespace optlab
