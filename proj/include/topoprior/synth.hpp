#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "topoprior/field.hpp"

namespace topoprior {

/// Isotropic Gaussian bump: amplitude * exp(-r^2 / (2 sigma^2)).
struct GaussianBlob {
    std::vector<double> center;
    double sigma = 1.0;
    double amplitude = 1.0;
};

/// 2D ring of pixels whose distance to `center` lies in [inner, outer].
struct Annulus {
    std::vector<double> center;
    double inner = 0.0;
    double outer = 0.0;
    double amplitude = 1.0;
};

/// Axis-aligned block covering pixel coordinates lo..hi inclusive.
struct Box {
    std::vector<std::size_t> lo;
    std::vector<std::size_t> hi;
    double amplitude = 1.0;
};

/// 3D spherical shell of voxels whose distance to `center` lies in [inner, outer].
struct Shell {
    std::vector<double> center;
    double inner = 0.0;
    double outer = 0.0;
    double amplitude = 1.0;
};

using Primitive = std::variant<GaussianBlob, Annulus, Box, Shell>;

struct SynthSpec {
    Shape shape;
    std::vector<Primitive> primitives;
    double noise_sigma = 0.0;   // 0 = no noise
    std::uint64_t seed = 0;
};

/// Composites the primitives by pointwise max over a zero background, adds
/// Gaussian noise and clamps to [0, 1]. Throws DataError for primitives that
/// do not fit the shape.
ScalarField generate(const SynthSpec& spec);

/// Parses a JSON document such as
///   {"shape": [80, 80], "seed": 7, "noise": {"type": "gaussian", "sigma": 0.2},
///    "primitives": [{"type": "annulus", "center": [40, 40], "inner": 10, "outer": 14}]}
SynthSpec parse_synth_spec(std::string_view json_text);

/// Counter-based generator: the n-th draw depends only on (seed, n).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    std::uint64_t bits(std::uint64_t counter) const;
    /// Uniform in (0, 1).
    double uniform(std::uint64_t counter) const;
    /// Standard normal via Box-Muller on counters 2n and 2n+1.
    double normal(std::uint64_t n) const;

private:
    std::uint64_t seed_;
};

/// Three Gaussian blobs and one annulus on an 80x80 grid.
SynthSpec three_blobs_and_ring(double noise_sigma, std::uint64_t seed);

/// Single annulus centred on an n x n grid.
SynthSpec ring(std::size_t n, double noise_sigma, std::uint64_t seed);

}  // namespace topoprior
