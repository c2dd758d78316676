#ifndef CMO_RNG_HPP
#define CMO_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace cmo {

/// Deterministic random stream.
///
/// The bit source is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not portable, so every derived
/// draw (uniform reals, bounded integers) is computed here from raw 64-bit
/// words. The same seed therefore yields the same draw sequence on every
/// conforming platform.
class Rng {
public:
    static constexpr const char* generator_name = "mt19937_64/portable-v1";

    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::size_t below(std::size_t n) {
        if (n == 0) {
            throw std::invalid_argument("Rng::below: empty range");
        }
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return static_cast<std::size_t>(x % bound);
    }

    bool coin() { return (engine_() >> 63) != 0; }

    template <typename T>
    const T& pick(std::span<const T> items) {
        return items[below(items.size())];
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace cmo

#endif
