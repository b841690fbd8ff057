#include "epiplan/rng.hpp"

#include <vector>

namespace epiplan {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix(std::uint64_t parent, std::uint64_t label) {
    std::uint64_t state = parent ^ (label * 0xd1b54a32d192ed03ULL + kGolden);
    splitmix64(state);
    return splitmix64(state);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RandomStream::RandomStream(SeedSpec seed) : RandomStream(mix(seed.master_seed, seed.stream_id), 0) {}

RandomStream::RandomStream(std::uint64_t key, int) : key_(key) { reseed(); }

void RandomStream::reseed() {
    std::uint64_t state = key_;
    for (auto& word : s_) word = splitmix64(state);
}

RandomStream::result_type RandomStream::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

RandomStream RandomStream::derive(std::span<const std::uint64_t> labels) const {
    std::uint64_t key = key_;
    for (auto label : labels) key = mix(key, label);
    return RandomStream(key, 0);
}

RandomStream RandomStream::derive(std::initializer_list<std::uint64_t> labels) const {
    return derive(std::span<const std::uint64_t>(labels.begin(), labels.size()));
}

RandomStream derive_rng(SeedSpec seed, std::span<const std::uint64_t> labels) {
    return RandomStream(seed).derive(labels);
}

RandomStream derive_rng(SeedSpec seed, std::initializer_list<std::uint64_t> labels) {
    return RandomStream(seed).derive(labels);
}

}  // namespace epiplan
