#include "morsekit/noise.hpp"

#include <algorithm>
#include <cmath>

#include "morsekit/errors.hpp"
#include "morsekit/units.hpp"

namespace morsekit {

double GaussianSampler::operator()() {
    // Cosine branch only; u1 is shifted away from zero so log() stays finite.
    const double u1 =
        (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * constants::pi * u2);
}

SpectrumTrace add_noise(const SpectrumTrace& trace, double level, std::uint64_t seed) {
    if (level < 0.0) throw DomainError("noise level must be >= 0");
    SpectrumTrace out = trace;
    if (level == 0.0 || trace.value.empty()) return out;
    const double peak = *std::max_element(trace.value.begin(), trace.value.end());
    const double sigma = level * peak;
    GaussianSampler gauss(seed);
    for (double& v : out.value) v += sigma * gauss();
    return out;
}

} // namespace morsekit
