#pragma once

#include "relmodel/numerics.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace relmodel {

/// Reproducible random stream keyed by (seed, stream id).
///
/// Each stream seeds its own 64-bit Mersenne Twister from SplitMix64 outputs
/// of the key, so distinct stream ids give statistically independent
/// sequences and replications can run on any thread. Not thread-safe; use one
/// stream per worker item.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform draw in the open interval (0, 1).
  double uniform();

  engine_type& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  engine_type engine_;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Multinomial(n, pi) by sequential binomial conditioning. `pi` must be
/// strictly positive and sum to one within 1e-12.
std::vector<std::int64_t> multinomial_draw(std::int64_t n, const Vector& pi,
                                           RngStream& rng);

}  // namespace relmodel
