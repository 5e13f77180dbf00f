#pragma once

#include <cstdint>
#include <vector>

namespace estkit {

/// SplitMix64: a counter advanced by the golden-ratio increment, pushed
/// through a 64-bit finalizer. Tiny, well documented, and reproducible across
/// platforms and languages, which is what the experiment seeds need.
class Splitmix64 {
public:
    explicit Splitmix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    /// Generator for sub-stream `stream` of `seed`. Streams are decorrelated
    /// by hashing the pair, so draws from one stream never shift another.
    static Splitmix64 substream(std::uint64_t seed, std::uint64_t stream);

private:
    std::uint64_t state_;
};

/// Standard-normal stream: Box-Muller over SplitMix64 uniforms, second value
/// of each pair cached.
class NormalStream {
public:
    explicit NormalStream(Splitmix64 gen) : gen_(gen) {}

    double next();

private:
    Splitmix64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// `count` standard-normal draws for `seed`; same seed, same sequence.
std::vector<double> gaussian_draws(std::uint64_t seed, std::size_t count);

}  // namespace estkit
