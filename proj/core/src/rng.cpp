#include "optlab/rng.hpp"

namespace optlab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return std::mt19937_64(mix_seed(seed, static_cast<std::uint64_t>(stream), index));
}

double gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

cplx circular_gaussian(std::mt19937_64& rng) {
  // Independent real and imaginary parts, each variance 1/2.
  const double re = gaussian(rng);
  const double im = gaussian(rng);
  return cplx(re, im) * std::sqrt(0.5);
}

CVec circular_gaussian_vec(std::mt19937_64& rng, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = circular_gaussian(rng);
  return v;
}

}  // namespace optlab
