#pragma once

#include <cstdint>

namespace gwi {

/// Counter-based random stream.  A replica's stream is fully determined by
/// (seed, stream) so Monte Carlo results do not depend on worker count or
/// scheduling.  The output function is the splitmix64 finalizer over a
/// Weyl-sequenced counter, keyed per stream.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) {
        key_ = mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
        key_ = mix(key_ ^ mix(stream + 0x632BE59BD9B4E019ull));
        if (key_ == 0) key_ = 0x106689D45497FDB5ull;
    }

    std::uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ull;
        return mix(counter_ ^ key_);
    }

    /// Uniform double strictly inside (0, 1).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }
    result_type operator()() { return next_u64(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace gwi
