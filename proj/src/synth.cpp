#include "topoprior/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace topoprior {

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    // SplitMix64 finalizer applied to seed-offset counters.
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t n) const {
    const double u1 = uniform(2 * n), u2 = uniform(2 * n + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

void check_arity(std::size_t got, int ndim, const char* what) {
    if (got != static_cast<std::size_t>(ndim)) {
        throw DataError(std::string(what) + " needs " + std::to_string(ndim) + " coordinates");
    }
}

void check_round(const Shape& shape, const std::vector<double>& center, double inner, double outer,
                 const char* what) {
    check_arity(center.size(), shape.ndim(), what);
    if (!(inner >= 0.0 && outer >= inner)) throw DataError(std::string(what) + " radii must satisfy 0 <= inner <= outer");
    for (int a = 0; a < shape.ndim(); ++a) {
        if (center[a] - outer < 0.0 || center[a] + outer > static_cast<double>(shape[a] - 1)) {
            throw DataError(std::string(what) + " does not fit inside the field");
        }
    }
}

double distance(const std::array<std::size_t, 3>& px, const std::vector<double>& center) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < center.size(); ++a) {
        const double d = static_cast<double>(px[a]) - center[a];
        r2 += d * d;
    }
    return std::sqrt(r2);
}

struct Painter {
    const Shape& shape;
    std::array<std::size_t, 3> px;

    double operator()(const GaussianBlob& b) const {
        double r2 = 0.0;
        for (std::size_t a = 0; a < b.center.size(); ++a) {
            const double d = static_cast<double>(px[a]) - b.center[a];
            r2 += d * d;
        }
        return b.amplitude * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
    }
    double operator()(const Annulus& r) const {
        const double d = distance(px, r.center);
        return d >= r.inner && d <= r.outer ? r.amplitude : 0.0;
    }
    double operator()(const Box& b) const {
        for (int a = 0; a < shape.ndim(); ++a)
            if (px[a] < b.lo[a] || px[a] > b.hi[a]) return 0.0;
        return b.amplitude;
    }
    double operator()(const Shell& s) const {
        const double d = distance(px, s.center);
        return d >= s.inner && d <= s.outer ? s.amplitude : 0.0;
    }
};

void validate(const SynthSpec& spec) {
    const Shape& shape = spec.shape;
    const int nd = shape.ndim();
    if (nd != 2 && nd != 3) throw DataError("synth shape must be 2D or 3D");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) throw DataError("noise sigma must be >= 0");
    for (const auto& prim : spec.primitives) {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if (!std::isfinite(p.amplitude)) throw DataError("primitive amplitude must be finite");
                if constexpr (std::is_same_v<T, GaussianBlob>) {
                    check_arity(p.center.size(), nd, "blob");
                    if (!(p.sigma > 0.0)) throw DataError("blob sigma must be positive");
                    for (int a = 0; a < nd; ++a) {
                        if (p.center[a] < 0.0 || p.center[a] > static_cast<double>(shape[a] - 1)) {
                            throw DataError("blob centre lies outside the field");
                        }
                    }
                } else if constexpr (std::is_same_v<T, Annulus>) {
                    if (nd != 2) throw DataError("annulus primitives are 2D only");
                    check_round(shape, p.center, p.inner, p.outer, "annulus");
                } else if constexpr (std::is_same_v<T, Shell>) {
                    if (nd != 3) throw DataError("shell primitives are 3D only");
                    check_round(shape, p.center, p.inner, p.outer, "shell");
                } else {
                    check_arity(p.lo.size(), nd, "box");
                    check_arity(p.hi.size(), nd, "box");
                    for (int a = 0; a < nd; ++a) {
                        if (p.lo[a] > p.hi[a] || p.hi[a] >= shape[a]) throw DataError("box does not fit inside the field");
                    }
                }
            },
            prim);
    }
}

}  // namespace

ScalarField generate(const SynthSpec& spec) {
    validate(spec);
    const std::size_t n = spec.shape.size();
    std::vector<double> values(n, 0.0);
    const CounterRng rng(spec.seed);
    for (std::size_t i = 0; i < n; ++i) {
        Painter paint{spec.shape, spec.shape.coords(PixelIndex{static_cast<std::uint32_t>(i)})};
        double v = 0.0;
        for (const auto& prim : spec.primitives) v = std::max(v, std::visit(paint, prim));
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal(i);
        values[i] = std::clamp(v, 0.0, 1.0);
    }
    return ScalarField(spec.shape, std::move(values));
}

SynthSpec parse_synth_spec(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("synth spec is not valid JSON: ") + e.what());
    }
    try {
        SynthSpec spec;
        spec.shape = Shape(j.at("shape").get<std::vector<std::size_t>>());
        spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("noise") && !j["noise"].is_null()) {
            const auto& noise = j["noise"];
            const auto type = noise.value("type", std::string("gaussian"));
            if (type == "gaussian") spec.noise_sigma = noise.at("sigma").get<double>();
            else if (type != "none") throw DataError("unknown noise type '" + type + "'");
        }
        for (const auto& p : j.value("primitives", nlohmann::json::array())) {
            const auto type = p.at("type").get<std::string>();
            const double amplitude = p.value("amplitude", 1.0);
            if (type == "blob") {
                spec.primitives.emplace_back(
                    GaussianBlob{p.at("center").get<std::vector<double>>(), p.at("sigma").get<double>(), amplitude});
            } else if (type == "annulus") {
                spec.primitives.emplace_back(Annulus{p.at("center").get<std::vector<double>>(), p.at("inner").get<double>(),
                                                     p.at("outer").get<double>(), amplitude});
            } else if (type == "shell") {
                spec.primitives.emplace_back(Shell{p.at("center").get<std::vector<double>>(), p.at("inner").get<double>(),
                                                   p.at("outer").get<double>(), amplitude});
            } else if (type == "box") {
                spec.primitives.emplace_back(Box{p.at("lo").get<std::vector<std::size_t>>(),
                                                 p.at("hi").get<std::vector<std::size_t>>(), amplitude});
            } else {
                throw DataError("unknown primitive type '" + type + "'");
            }
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid synth spec: ") + e.what());
    }
}

SynthSpec three_blobs_and_ring(double noise_sigma, std::uint64_t seed) {
    SynthSpec spec;
    spec.shape = Shape{80, 80};
    spec.primitives = {
        GaussianBlob{{18.0, 18.0}, 4.0, 1.0},
        GaussianBlob{{18.0, 60.0}, 4.0, 1.0},
        GaussianBlob{{60.0, 18.0}, 4.0, 1.0},
        Annulus{{56.0, 56.0}, 9.0, 14.0, 1.0},
    };
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    return spec;
}

SynthSpec ring(std::size_t n, double noise_sigma, std::uint64_t seed) {
    SynthSpec spec;
    spec.shape = Shape{n, n};
    const double c = static_cast<double>(n - 1) / 2.0;
    const double outer = static_cast<double>(n) * 0.35;
    spec.primitives = {Annulus{{c, c}, outer - 3.0, outer, 1.0}};
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    return spec;
}

}  // namespace topoprior
