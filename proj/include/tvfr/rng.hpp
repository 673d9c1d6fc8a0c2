#pragma once

#include <cstdint>
#include <limits>

namespace tvfr {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based generator: draw c of stream `key` is mix64(key + c·golden). Streams for
// independent tasks come from derive_seed, so results never depend on execution order.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    // Uniform on the open interval (0,1).
    double uniform() noexcept { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(master ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

// Standard normal draw by inverse transform.
double standard_normal(CounterRng& rng);

// Gamma(shape, rate) by Marsaglia–Tsang; shape < 1 is boosted via G(a) = G(a+1)·U^{1/a}.
double gamma_draw(CounterRng& rng, double shape, double rate);

}  // namespace tvfr
