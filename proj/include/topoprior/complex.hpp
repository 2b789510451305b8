#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topoprior/field.hpp"

namespace topoprior {

/// Linear index of a cell in the doubled grid (extent 2N+1 per axis, C order).
using CellIndex = std::uint32_t;

/// Small fixed-capacity list of cell indices (faces or cofaces of one cell).
struct CellList {
    std::array<CellIndex, 6> items{};
    int count = 0;

    const CellIndex* begin() const { return items.data(); }
    const CellIndex* end() const { return items.data() + count; }
    int size() const { return count; }
    CellIndex operator[](int i) const { return items[i]; }
    void push(CellIndex c) { items[count++] = c; }
};

struct Cell {
    std::array<std::uint32_t, 3> coords{};
    int dim = 0;
    double filtration_value = 0.0;
    PixelIndex critical_pixel;
};

/// Cubical complex of a field's super-level filtration, T-construction.
///
/// Pixels are the top-dimensional cubes; every lower cell takes the largest
/// value among the pixels it bounds, attributed to the smallest pixel index
/// among ties. Filtration values are kept negated internally so the order is
/// an ordinary ascending one: internal value, then dimension, then cell index.
/// Public values are always reported in the original super-level convention.
class FilteredComplex {
public:
    explicit FilteredComplex(ScalarField field);

    const ScalarField& field() const { return field_; }
    const Shape& shape() const { return field_.shape(); }
    int ndim() const { return ndim_; }
    std::size_t cell_count() const { return critical_.size(); }
    std::size_t grid_extent(int axis) const { return extent_[axis]; }

    std::array<std::uint32_t, 3> coords(CellIndex cell) const;
    CellIndex cell_at(const std::array<std::uint32_t, 3>& coords) const;
    int cell_dim(CellIndex cell) const;
    CellIndex top_cell(PixelIndex pixel) const;
    Cell cell(CellIndex index) const;

    double value(CellIndex cell) const { return field_.values()[critical_[cell]]; }
    double internal_value(CellIndex cell) const { return -value(cell); }
    PixelIndex critical_pixel(CellIndex cell) const { return PixelIndex{critical_[cell]}; }

    /// Codimension-1 faces.
    CellList boundary(CellIndex cell) const;
    /// Codimension-1 cofaces.
    CellList cofaces(CellIndex cell) const;

    /// Strict filtration order between two cells.
    bool precedes(CellIndex a, CellIndex b) const;

    /// Cells of each dimension 0..ndim in filtration order (one list per dimension).
    std::vector<std::vector<CellIndex>> order_by_dim() const;
    /// All cells in filtration order.
    std::vector<CellIndex> filtration_order() const;

    /// Number of cells of dimension `dim`.
    std::size_t cells_of_dim(int dim) const;

private:
    ScalarField field_;
    int ndim_ = 0;
    std::array<std::size_t, 3> extent_{1, 1, 1};
    std::array<std::size_t, 3> stride_{0, 0, 0};
    std::vector<std::uint32_t> critical_;
};

FilteredComplex build_superlevel(const ScalarField& field);

/// Pixels of B(p): every pixel with value >= p, ascending index order.
std::vector<PixelIndex> superlevel_membership(const FilteredComplex& complex, double p);

}  // namespace topoprior
