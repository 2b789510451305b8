#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "topoprior/field.hpp"
#include "topoprior/persistence.hpp"

namespace testing {

using namespace topoprior;

inline std::filesystem::path data_dir() { return TOPOPRIOR_TEST_DATA; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

/// Scratch directory unique to the calling test.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("topoprior_tests_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// i.i.d. uniform values in [0, 1); ties have probability zero.
inline ScalarField random_field(Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(shape.size());
    for (auto& x : v) x = u(rng);
    return ScalarField(shape, std::move(v));
}

/// Values drawn from {0, 1/levels, ..., 1}; lots of ties.
inline ScalarField quantized_field(Shape shape, std::uint64_t seed, int levels = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, levels);
    std::vector<double> v(shape.size());
    for (auto& x : v) x = static_cast<double>(u(rng)) / levels;
    return ScalarField(shape, std::move(v));
}

/// Evenly spaced values in random order, jittered by less than a tenth of the
/// spacing, so every pair of pixels differs by a comfortable margin.
inline ScalarField spread_field(Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = shape.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    const double step = 1.0 / static_cast<double>(n + 1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(perm[i]) + 1.0 + jitter(rng)) * step;
    return ScalarField(shape, std::move(v));
}

/// The one-pixel-wide border of a 5x5 block inside a 9x9 zero field.
inline ScalarField ring_field() {
    std::vector<double> v(81, 0.0);
    for (std::size_t r = 2; r <= 6; ++r)
        for (std::size_t c = 2; c <= 6; ++c)
            if (r == 2 || r == 6 || c == 2 || c == 6) v[r * 9 + c] = 1.0;
    return ScalarField(Shape{9, 9}, std::move(v));
}

/// Rotates a 2D field by 90 degrees counter-clockwise.
inline ScalarField rotate90(const ScalarField& f) {
    const std::size_t rows = f.shape()[0], cols = f.shape()[1];
    std::vector<double> v(f.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) v[(cols - 1 - c) * rows + r] = f.at(r * cols + c);
    return ScalarField(Shape{cols, rows}, std::move(v));
}

using BarKey = std::tuple<int, double, double, std::uint32_t, long, bool>;

inline std::vector<BarKey> bar_keys(const Barcode& b) {
    std::vector<BarKey> out;
    for (const auto& p : b.all()) {
        out.emplace_back(p.dim, p.birth, p.death, p.birth_pixel.value,
                         p.death_pixel ? static_cast<long>(p.death_pixel->value) : -1L, p.essential);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace testing
