#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>

#include "epiplan/types.hpp"

namespace epiplan {

// Keyed random stream. The key is a pure function of (master_seed, stream_id,
// label path), so a stream for (region, day, replication) is the same no
// matter which worker thread draws from it.
//
// Satisfies UniformRandomBitGenerator; the engine is xoshiro256** seeded by
// splitmix64 expansion of the key.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream() : RandomStream(SeedSpec{}) {}
    explicit RandomStream(SeedSpec seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Child stream for a label path; does not advance this stream.
    RandomStream derive(std::span<const std::uint64_t> labels) const;
    RandomStream derive(std::initializer_list<std::uint64_t> labels) const;

    std::uint64_t key() const { return key_; }

    // Uniform double in [0, 1).
    double uniform();

private:
    explicit RandomStream(std::uint64_t key, int);
    void reseed();

    std::uint64_t key_;
    std::uint64_t s_[4];
};

RandomStream derive_rng(SeedSpec seed, std::span<const std::uint64_t> labels);
RandomStream derive_rng(SeedSpec seed, std::initializer_list<std::uint64_t> labels);

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace epiplan
