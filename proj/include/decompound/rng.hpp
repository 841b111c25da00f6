#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace decompound {

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Counter-based 64-bit generator.
 *
 * The n-th output is a pure function of (key, n), so independent streams are
 * obtained by deriving keys from a seed and a path of stream ids, e.g.
 * `Rng::stream(seed, {m, replicate, observation})`. Output sequences do not
 * depend on how work is split across threads.
 *
 * Satisfies UniformRandomBitGenerator, but all variates used by the library
 * come from the member samplers below so results are bit-identical across
 * standard library implementations.
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) noexcept : key_(detail::mix64(key ^ detail::kGolden)) {}

    static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
    {
        std::uint64_t k = detail::mix64(seed + detail::kGolden);
        for (auto id : path) {
            k = detail::mix64(k ^ detail::mix64(id + 0x632be59bd9b4e019ULL));
        }
        return Rng(k);
    }

    /// Child stream; does not advance this generator.
    [[nodiscard]] Rng split(std::uint64_t id) const noexcept
    {
        return Rng(detail::mix64(key_ ^ detail::mix64(id + 0xd1b54a32d192ed03ULL)));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t c = counter_++;
        return detail::mix64(detail::mix64(c * detail::kGolden + key_) ^ key_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal (Marsaglia polar method).
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Seed for a derived experiment (e.g. one replicate at one grid point).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
{
    return Rng::stream(seed, path)();
}

}  // namespace decompound
