#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace topoprior {

/// Raised for malformed or out-of-contract input data (bad files, invalid
/// values, incompatible formats).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear, row-major index into a field's value array.
struct PixelIndex {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(PixelIndex, PixelIndex) = default;
};

/// Extents of a 2D image or 3D volume, slowest axis first.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> extents);
    explicit Shape(std::span<const std::size_t> extents);

    int ndim() const { return ndim_; }
    std::size_t operator[](int axis) const { return extents_[axis]; }
    std::size_t size() const;  // V, the pixel/voxel count

    std::array<std::size_t, 3> coords(PixelIndex index) const;
    PixelIndex index(std::span<const std::size_t> coords) const;

    std::vector<std::size_t> extents() const;
    std::string to_string() const;

    friend bool operator==(const Shape&, const Shape&) = default;

private:
    int ndim_ = 0;
    std::array<std::size_t, 3> extents_{0, 0, 0};
};

/// Dense 2D/3D array of finite real values in C order. Immutable once built.
class ScalarField {
public:
    ScalarField() = default;
    /// Throws DataError if the value count does not match the shape or a
    /// value is not finite.
    ScalarField(Shape shape, std::vector<double> values);

    static ScalarField constant(Shape shape, double value);

    const Shape& shape() const { return shape_; }
    int ndim() const { return shape_.ndim(); }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](PixelIndex p) const { return values_[p.value]; }
    double at(std::size_t linear) const { return values_.at(linear); }

    /// True when every value lies in [0, 1].
    bool normalized() const { return normalized_; }

    double max_value() const;
    double min_value() const;

    ScalarField with_values(std::vector<double> values) const;

private:
    Shape shape_;
    std::vector<double> values_;
    bool normalized_ = false;
};

enum class FieldFormat { csv, npy, pgm };

FieldFormat parse_format(std::string_view name);
std::string_view format_name(FieldFormat format);
/// Guesses the format from the file extension (.csv, .npy, .pgm).
FieldFormat format_from_extension(const std::filesystem::path& path);

ScalarField load_field(const std::filesystem::path& path, FieldFormat format);
void save_field(const ScalarField& field, const std::filesystem::path& path, FieldFormat format);

// Stream-level codecs; the path versions above wrap these.
ScalarField parse_csv(std::string_view text);
std::string format_csv(const ScalarField& field);
ScalarField parse_npy(std::string_view bytes);
std::string format_npy(const ScalarField& field);
ScalarField parse_pgm(std::string_view bytes);
std::string format_pgm(const ScalarField& field, unsigned maxval = 255);

/// Projects every value onto [0, 1].
ScalarField clamp_unit(const ScalarField& field);

}  // namespace topoprior
