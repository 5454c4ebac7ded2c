#ifndef ALABAMA_RNG_HPP
#define ALABAMA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace alabama {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based stream: the i-th output depends only on (key, i), so any
/// sub-computation keyed by e.g. (seed, house size) or (seed, sample index)
/// is reproducible regardless of evaluation order.
class KeyedStream {
public:
    using result_type = std::uint64_t;

    KeyedStream(std::uint64_t seed, std::uint64_t index) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL)))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return splitmix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

    /// Uniform integer in [0, bound), unbiased (Lemire rejection).
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        using u128 = unsigned __int128;
        u128 product = static_cast<u128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<u128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    /// Uniform double in (0, 1).
    double open_unit() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Unit-rate exponential variate.
    double exponential() noexcept { return -std::log(open_unit()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace alabama

#endif
