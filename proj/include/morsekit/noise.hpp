#pragma once

#include <cstdint>
#include <random>

#include "morsekit/spectrum.hpp"

namespace morsekit {

/// Deterministic Gaussian sampler: Box-Muller (cosine branch, one sample per
/// pair of uniforms) over mt19937_64, so traces reproduce bit-for-bit across
/// platforms for a given seed.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
    double operator()();

private:
    std::mt19937_64 rng_;
};

/// Add white Gaussian noise with sigma = level * max(value). Negative
/// samples are kept: a real detector baseline can undershoot, and clipping
/// would bias fits. level = 0 returns the trace unchanged.
SpectrumTrace add_noise(const SpectrumTrace& trace, double level, std::uint64_t seed);

} // namespace morsekit
