#ifndef VARIETIES_RNG_H_
#define VARIETIES_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace varieties {

// Mixes a seed with a stream index (splitmix64 finalizer). Used to give
// independent, order-free seeds to bootstrap iterations, CV folds and
// k-means restarts.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Seeded generator with portable bounded draws. std::uniform_int_distribution
// is implementation-defined, so results would differ across standard
// libraries; everything here is specified bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal draw (Box-Muller, no cached second value).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace varieties

#endif  // VARIETIES_RNG_H_
