#include "estkit/rng.hpp"

#include <cmath>
#include <numbers>

namespace estkit {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Splitmix64::next() {
    state_ += kGolden;
    return mix64(state_);
}

Splitmix64 Splitmix64::substream(std::uint64_t seed, std::uint64_t stream) {
    return Splitmix64(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL)));
}

double NormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 =
        (static_cast<double>(gen_.next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::vector<double> gaussian_draws(std::uint64_t seed, std::size_t count) {
    NormalStream stream{Splitmix64(seed)};
    std::vector<double> out(count);
    for (double& v : out) {
        v = stream.next();
    }
    return out;
}

}  // namespace estkit
