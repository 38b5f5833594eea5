#include "relmodel/rng.hpp"

#include "relmodel/errors.hpp"

#include <cmath>

namespace relmodel {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

RngStream::engine_type make_engine(std::uint64_t seed,
                                   std::uint64_t stream_id) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state ^= stream_id * 0xD1B54A32D192ED03ULL;
  std::uint32_t words[8];
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t v = splitmix64(state) ^ (i == 0 ? a : 0);
    words[2 * i] = static_cast<std::uint32_t>(v);
    words[2 * i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  std::seed_seq seq(std::begin(words), std::end(words));
  return RngStream::engine_type(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // 53 random bits mapped to the midpoints of a uniform grid: never 0 or 1.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::vector<std::int64_t> multinomial_draw(std::int64_t n, const Vector& pi,
                                           RngStream& rng) {
  if (n < 0) throw Error(ErrorKind::domain, "multinomial: negative size");
  if (pi.size() == 0) throw Error(ErrorKind::domain, "multinomial: empty pi");
  if (!pi.allFinite() || pi.minCoeff() <= 0.0) {
    throw Error(ErrorKind::domain,
                "multinomial: probabilities must be strictly positive");
  }
  if (std::abs(pi.sum() - 1.0) > 1e-12) {
    throw Error(ErrorKind::domain, "multinomial: probabilities must sum to 1");
  }
  const Index r = pi.size();
  std::vector<std::int64_t> y(static_cast<std::size_t>(r), 0);
  std::int64_t remaining = n;
  for (Index j = 0; j + 1 < r && remaining > 0; ++j) {
    const double mass = pi.tail(r - j).sum();
    const double prob = std::min(1.0, pi(j) / mass);
    std::binomial_distribution<std::int64_t> binom(remaining, prob);
    const std::int64_t draw = binom(rng.engine());
    y[static_cast<std::size_t>(j)] = draw;
    remaining -= draw;
  }
  y[static_cast<std::size_t>(r - 1)] += remaining;
  return y;
}

}  // namespace relmodel
