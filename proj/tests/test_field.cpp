#include "doctest.h"
#include "support.hpp"

using namespace topoprior;
using testing::data_dir;

TEST_SUITE("field") {

TEST_CASE("csv of zeros loads as a 3x3 zero field") {
    const auto f = parse_csv("0,0,0\n0,0,0\n0,0,0\n");
    CHECK(f.shape() == Shape{3, 3});
    for (double v : f.values()) CHECK(v == 0.0);
    CHECK(f.normalized());
}

TEST_CASE("csv serialization is plain shortest text") {
    const ScalarField f(Shape{2, 2}, {0.0, 1.0, 0.25, 0.75});
    CHECK(format_csv(f) == "0,1\n0.25,0.75\n");
    CHECK(parse_csv(format_csv(f)).values()[3] == 0.75);
}

TEST_CASE("csv tolerates CRLF and rejects ragged or malformed rows") {
    CHECK(parse_csv("1,2\r\n3,4\r\n").shape() == Shape{2, 2});
    CHECK_THROWS_AS(parse_csv("1,2\n3\n"), DataError);
    CHECK_THROWS_AS(parse_csv("1,x\n"), DataError);
    CHECK_THROWS_AS(parse_csv(""), DataError);
    CHECK_THROWS_AS(parse_csv("nan,1\n"), DataError);
}

TEST_CASE("pgm P2 single white pixel is 1.0") {
    const auto f = parse_pgm("P2\n1 1\n255\n255\n");
    CHECK(f.shape() == Shape{1, 1});
    CHECK(f.values()[0] == 1.0);
}

TEST_CASE("pgm fixtures scale by maxval") {
    const auto p2 = load_field(data_dir() / "tiny_p2.pgm", FieldFormat::pgm);
    CHECK(p2.shape() == Shape{2, 3});
    CHECK(p2.values()[1] == 128.0 / 255.0);
    CHECK(p2.values()[5] == 16.0 / 255.0);
    const auto p5 = load_field(data_dir() / "tiny_p5.pgm", FieldFormat::pgm);
    CHECK(p5.shape() == Shape{1, 2});
    CHECK(p5.values()[0] == 0.0);
    CHECK(p5.values()[1] == 1.0);
}

TEST_CASE("pgm 16-bit raster is big-endian") {
    std::string bytes = "P5\n1 1\n65535\n";
    bytes += '\x80';
    bytes += '\x00';
    CHECK(parse_pgm(bytes).values()[0] == 32768.0 / 65535.0);
}

TEST_CASE("pgm save rounds half to even") {
    // 0.5 * 255 = 127.5 -> 128 under ties-to-even
    const auto f = ScalarField::constant(Shape{1, 1}, 0.5);
    const auto back = parse_pgm(format_pgm(f));
    CHECK(back.values()[0] == 128.0 / 255.0);
    CHECK(parse_pgm(format_pgm(f, 1)).values()[0] == 0.0);  // 0.5 -> 0 with maxval 1
    CHECK(parse_pgm(format_pgm(f, 3)).values()[0] == 2.0 / 3.0);  // 1.5 -> 2
}

TEST_CASE("pgm rejects 3D and unnormalized fields") {
    CHECK_THROWS_AS(format_pgm(ScalarField::constant(Shape{2, 2, 2}, 0.5)), DataError);
    CHECK_THROWS_AS(format_pgm(ScalarField::constant(Shape{2, 2}, 1.5)), DataError);
    CHECK_THROWS_AS(parse_pgm("P6\n1 1\n255\n\x01\x02\x03"), DataError);
}

TEST_CASE("npy ramp fixture written by numpy reads back exactly") {
    const auto f = load_field(data_dir() / "ramp_f8.npy", FieldFormat::npy);
    CHECK(f.shape() == Shape{4, 4, 4});
    REQUIRE(f.size() == 64);
    for (std::size_t i = 0; i < 64; ++i) CHECK(f.at(i) == static_cast<double>(i) * 0.1 - 1.3);
    CHECK_FALSE(f.normalized());
}

TEST_CASE("npy float32 in either byte order") {
    for (const char* name : {"small_f4.npy", "small_f4_be.npy"}) {
        const auto f = load_field(data_dir() / name, FieldFormat::npy);
        CHECK(f.shape() == Shape{2, 3});
        CHECK(f.values()[1] == 0.25);
        CHECK(f.values()[5] == 0.125);
    }
}

TEST_CASE("npy rejects fortran order, integer dtypes and junk") {
    CHECK_THROWS_AS(load_field(data_dir() / "fortran.npy", FieldFormat::npy), DataError);
    CHECK_THROWS_AS(load_field(data_dir() / "ints.npy", FieldFormat::npy), DataError);
    CHECK_THROWS_AS(parse_npy("not an npy file"), DataError);
}

TEST_CASE("npy round trip is the identity") {
    const auto dir = testing::scratch("npy_roundtrip");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Shape shape = seed % 2 ? Shape{8, 8} : Shape{3, 4, 5};
        auto f = testing::random_field(shape, seed);
        // exercise values outside [0,1] and awkward bit patterns as well
        std::vector<double> v(f.values().begin(), f.values().end());
        v[0] = -1e300;
        v[1] = 5e-324;
        v[2] = 0.1;
        f = f.with_values(v);
        save_field(f, dir / "f.npy", FieldFormat::npy);
        const auto g = load_field(dir / "f.npy", FieldFormat::npy);
        CHECK(g.shape() == f.shape());
        CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));
    }
}

TEST_CASE("npy header is 64-byte aligned") {
    const auto bytes = format_npy(ScalarField::constant(Shape{2, 2}, 0.0));
    const std::size_t header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
    CHECK((10 + header_len) % 64 == 0);
    CHECK(bytes.size() == 10 + header_len + 4 * 8);
}

TEST_CASE("clamp_unit") {
    const ScalarField f(Shape{1, 3}, {1.3, -0.2, 0.5});
    const auto c = clamp_unit(f);
    CHECK(c.values()[0] == 1.0);
    CHECK(c.values()[1] == 0.0);
    CHECK(c.values()[2] == 0.5);
    CHECK(c.normalized());
    const auto cc = clamp_unit(c);
    CHECK(std::equal(c.values().begin(), c.values().end(), cc.values().begin()));
}

TEST_CASE("coordinate and linear index conversion is a bijection") {
    for (const Shape& shape : {Shape{3, 5}, Shape{2, 3, 4}, Shape{1, 7}}) {
        for (std::uint32_t i = 0; i < shape.size(); ++i) {
            const auto c = shape.coords(PixelIndex{i});
            CHECK(shape.index(std::span<const std::size_t>(c.data(), shape.ndim())) == PixelIndex{i});
        }
    }
}

TEST_CASE("shape and value validation") {
    CHECK_THROWS_AS(Shape{4}, DataError);
    CHECK_THROWS_AS((Shape{1, 2, 3, 4}), DataError);
    CHECK_THROWS_AS((Shape{0, 3}), DataError);
    CHECK_THROWS_AS(ScalarField(Shape{2, 2}, {1.0, 2.0}), DataError);
    CHECK_THROWS_AS(ScalarField(Shape{1, 1}, {std::numeric_limits<double>::infinity()}), DataError);
}

TEST_CASE("format names and extensions") {
    CHECK(parse_format("npy") == FieldFormat::npy);
    CHECK(format_from_extension("a/b.PGM") == FieldFormat::pgm);
    CHECK(format_from_extension("x.csv") == FieldFormat::csv);
    CHECK_THROWS_AS(format_from_extension("x.png"), DataError);
    CHECK_THROWS_AS(load_field("/nonexistent/field.csv", FieldFormat::csv), DataError);
}

}
