#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace simlab {

// Counter-based pseudorandom generator. Output i of stream `key` is
// splitmix64_finalize(key + i * GOLDEN), i.e. the classic splitmix64 sequence
// seeded with `key`. The generator is a pure function of (key, counter), so
// streams are portable across platforms and stable under refactors, and
// substreams can be derived cheaply by hashing a tag into the key.
//
// All distribution draws (categorical, bernoulli, uniform) are hand-rolled on
// top of next_double() so that results do not depend on any
// implementation-defined standard-library distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double();

  double uniform(double lo, double hi);

  bool bernoulli(double p);

  // Index drawn according to `probs` (entries nonnegative, summing to ~1).
  // Any rounding slack is assigned to the last positive entry.
  int categorical(const std::vector<double>& probs);

  // Uniform integer in [0, n).
  int uniform_int(int n);

  // Independent stream derived from this stream's key and a tag. Derivation
  // does not consume or depend on the counter.
  Rng substream(std::uint64_t tag) const;
  Rng substream(std::string_view tag) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace simlab
