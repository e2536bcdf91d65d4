#pragma once

#include <vector>

#include "optlab/config.hpp"
#include "optlab/rng.hpp"
#include "optlab/types.hpp"

namespace optlab {

// Azimuth measured in the x-y plane from +x, elevation from +z.
struct AnglePair {
  double azimuth = 0.0;
  double elevation = 0.0;
};

struct Geometry {
  Vec3 bs_position;
  Vec3 ir_position;
  std::vector<Vec3> ue_positions;

  AnglePair bs_departure;             // BS toward IR
  AnglePair ir_arrival;               // IR toward BS
  std::vector<AnglePair> ir_departure;  // IR toward each UE
  std::vector<AnglePair> bs_to_ue;      // BS toward each UE (direct link)

  std::vector<double> cascade_distance;  // |BS-IR| + |IR-UE_k|, meters
  std::vector<double> direct_distance;   // |BS-UE_k|, meters
};

AnglePair direction_angles(const Vec3& from, const Vec3& to);

// (x, y) ~ N((cx, cy), var I), z = 0. Deterministic per seed.
std::vector<Vec3> sample_ue_positions(std::uint64_t seed, int K,
                                      double cx, double cy, double var);
std::vector<Vec3> sample_ue_positions(std::uint64_t seed, const NetworkConfig& cfg);

// Pure; throws std::invalid_argument on coincident endpoints.
Geometry derive_geometry(const Vec3& bs, const Vec3& ir,
                         const std::vector<Vec3>& ues);

}  // namespace optlab
