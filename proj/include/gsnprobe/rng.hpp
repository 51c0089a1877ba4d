#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

namespace gsnprobe {

// Seedable generator whose draws are identical on every platform. The
// standard library distributions are implementation-defined, so all draws
// go through boost::random or the inverse-CDF code below.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  // Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

  // Draws an index from an unnormalized nonnegative weight vector.
  std::size_t categorical(std::span<const double> weights);

  double gamma(double shape);

  std::vector<double> dirichlet(std::size_t k, double alpha);

  std::uint64_t next_u64() { return engine_(); }

 private:
  boost::random::mt19937_64 engine_;
};

// Decorrelates per-chain seeds derived from one user seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace gsnprobe
