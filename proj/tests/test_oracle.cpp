#include "doctest.h"
#include "support.hpp"
#include "topoprior/oracle.hpp"

using namespace topoprior;

namespace {

ScalarField hollow_cube(std::size_t n) {
    std::vector<double> v(n * n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (i == 0 || i == n - 1 || j == 0 || j == n - 1 || k == 0 || k == n - 1) v[(i * n + j) * n + k] = 1.0;
    return ScalarField(Shape{n, n, n}, v);
}

long euler(const std::vector<std::size_t>& counts) {
    long chi = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) chi += (k % 2 ? -1L : 1L) * static_cast<long>(counts[k]);
    return chi;
}

long alternating(const std::vector<std::size_t>& betti) { return euler(betti); }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("solid block is contractible") {
    std::vector<double> v(25, 0.0);
    for (std::size_t r = 1; r <= 3; ++r)
        for (std::size_t c = 1; c <= 3; ++c) v[r * 5 + c] = 1.0;
    CHECK(oracle_betti(ScalarField(Shape{5, 5}, v), 0.5) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("square annulus has one loop") {
    CHECK(oracle_betti(testing::ring_field(), 0.5) == std::vector<std::size_t>{1, 1});
}

TEST_CASE("hollow cube encloses a void") {
    CHECK(oracle_betti(hollow_cube(5), 0.5) == std::vector<std::size_t>{1, 0, 1});
    CHECK(oracle_betti(hollow_cube(5), 0.0) == std::vector<std::size_t>{1, 0, 0});
}

TEST_CASE("diagonal neighbours share a vertex") {
    const ScalarField f(Shape{2, 2}, {1.0, 0.0, 0.0, 1.0});
    CHECK(oracle_components(f, 0.5) == 1);
    CHECK(oracle_betti(f, 0.5) == std::vector<std::size_t>{1, 0});
    CHECK(oracle_betti(f, 1.5) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("single pixel reference barcode matches the engine") {
    const FilteredComplex cx(ScalarField::constant(Shape{1, 1}, 0.3));
    CHECK(testing::bar_keys(oracle_barcode(cx)) == testing::bar_keys(compute_barcode(cx)));
}

TEST_CASE("euler characteristic agrees with the Betti numbers in 2D") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto f = seed % 2 ? testing::random_field(Shape{5, 6}, seed) : testing::quantized_field(Shape{6, 5}, seed);
        for (double p : {0.2, 0.5, 0.8, f.at(seed % f.size())}) {
            CHECK(alternating(oracle_betti(f, p)) == euler(superlevel_cell_counts(f, p)));
        }
    }
}

TEST_CASE("euler characteristic agrees with the Betti numbers in 3D") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto f = testing::random_field(Shape{3, 4, 3}, seed);
        for (double p : {0.3, 0.6, f.at(seed % f.size())}) {
            CHECK(alternating(oracle_betti(f, p)) == euler(superlevel_cell_counts(f, p)));
        }
    }
}

TEST_CASE("betti curve is listed from the top value down") {
    const auto curve = oracle_betti_curve(testing::ring_field());
    CHECK(curve.values == std::vector<double>{1.0, 0.0});
    CHECK(curve.betti[0] == std::vector<std::size_t>{1, 1});
    CHECK(curve.betti[1] == std::vector<std::size_t>{1, 0});
}

TEST_CASE("verify passes for the main engine") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = verify_field(testing::random_field(seed % 2 ? Shape{6, 6} : Shape{3, 3, 3}, seed));
        CHECK(r.ok);
        CHECK(r.differences.empty());
        CHECK(r.probes > 0);
    }
}

TEST_CASE("verify catches an engine with the wrong tie-break") {
    // reverse the pixel order, run the engine, and map pixels back
    auto mirrored = [](const FilteredComplex& cx) {
        const auto values = cx.field().values();
        const ScalarField flipped(cx.shape(), std::vector<double>(values.rbegin(), values.rend()));
        const auto last = static_cast<std::uint32_t>(values.size() - 1);
        auto bars = compute_barcode(FilteredComplex(flipped)).all();
        for (auto& b : bars) {
            b.birth_pixel.value = last - b.birth_pixel.value;
            if (b.death_pixel) b.death_pixel->value = last - b.death_pixel->value;
        }
        return Barcode(cx.ndim(), std::move(bars));
    };
    const auto report = verify_field(testing::ring_field(), mirrored);
    CHECK_FALSE(report.ok);
    CHECK_FALSE(report.differences.empty());
}

TEST_CASE("the reference reduction refuses large inputs") {
    CHECK_THROWS_AS(oracle_barcode(FilteredComplex(ScalarField::constant(Shape{200, 200}, 0.5))), SizeGuardError);
    CHECK_THROWS_AS(verify_field(ScalarField::constant(Shape{71, 71}, 0.5)), SizeGuardError);
}

}
