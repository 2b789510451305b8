#include "topoprior/complex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace topoprior {

namespace {

// Pixel value groups: pixels sorted by value descending, equal values sharing
// a group id. Group 0 holds the maximum.
std::vector<std::uint32_t> pixel_groups(std::span<const double> values, std::uint32_t& group_count) {
    std::vector<std::uint32_t> by_value(values.size());
    std::iota(by_value.begin(), by_value.end(), 0u);
    std::sort(by_value.begin(), by_value.end(), [&](std::uint32_t a, std::uint32_t b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    });
    std::vector<std::uint32_t> group(values.size());
    std::uint32_t g = 0;
    for (std::size_t i = 0; i < by_value.size(); ++i) {
        if (i > 0 && values[by_value[i]] != values[by_value[i - 1]]) ++g;
        group[by_value[i]] = g;
    }
    group_count = values.empty() ? 0 : g + 1;
    return group;
}

}  // namespace

FilteredComplex::FilteredComplex(ScalarField field) : field_(std::move(field)) {
    ndim_ = field_.ndim();
    if (ndim_ != 2 && ndim_ != 3) throw DataError("complex requires a 2D or 3D field");
    std::size_t total = 1;
    for (int a = 0; a < ndim_; ++a) {
        extent_[a] = 2 * field_.shape()[a] + 1;
        total *= extent_[a];
    }
    if (total > std::numeric_limits<CellIndex>::max()) {
        throw DataError("complex too large for 32-bit cell indices: " + field_.shape().to_string());
    }
    // Axes beyond ndim have extent 1 and stride 0 so loops stay uniform.
    stride_ = {0, 0, 0};
    std::size_t s = 1;
    for (int a = ndim_ - 1; a >= 0; --a) {
        stride_[a] = s;
        s *= extent_[a];
    }

    critical_.resize(total);
    const auto values = field_.values();
    const std::array<std::size_t, 3> n{field_.shape()[0], field_.shape()[1], ndim_ == 3 ? field_.shape()[2] : 1};
    const std::array<std::size_t, 3> pix_stride{n[1] * n[2], n[2], 1};

    // Per axis, the pixel coordinates a doubled-grid coordinate touches:
    // odd x -> (x-1)/2 only; even x -> x/2-1 and x/2 where in range.
    auto candidates = [&](int axis, std::size_t x, std::array<std::size_t, 2>& out) {
        if (axis >= ndim_) {
            out[0] = 0;
            return 1;
        }
        if (x % 2 == 1) {
            out[0] = (x - 1) / 2;
            return 1;
        }
        int k = 0;
        if (x >= 2) out[k++] = x / 2 - 1;
        if (x / 2 < n[axis]) out[k++] = x / 2;
        return k;
    };

    std::size_t idx = 0;
    std::array<std::size_t, 2> c0{}, c1{}, c2{};
    for (std::size_t x0 = 0; x0 < extent_[0]; ++x0) {
        const int k0 = candidates(0, x0, c0);
        for (std::size_t x1 = 0; x1 < extent_[1]; ++x1) {
            const int k1 = candidates(1, x1, c1);
            for (std::size_t x2 = 0; x2 < extent_[2]; ++x2, ++idx) {
                const int k2 = candidates(2, x2, c2);
                // Lexicographic enumeration visits pixel indices in increasing
                // order, so a strict '>' keeps the smallest maximizing index.
                std::size_t best = 0;
                double best_v = -std::numeric_limits<double>::infinity();
                bool first = true;
                for (int i0 = 0; i0 < k0; ++i0)
                    for (int i1 = 0; i1 < k1; ++i1)
                        for (int i2 = 0; i2 < k2; ++i2) {
                            std::size_t p = c0[i0] * pix_stride[0] + c1[i1] * pix_stride[1] + c2[i2] * pix_stride[2];
                            if (first || values[p] > best_v) {
                                best = p;
                                best_v = values[p];
                                first = false;
                            }
                        }
                critical_[idx] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

std::array<std::uint32_t, 3> FilteredComplex::coords(CellIndex cell) const {
    std::array<std::uint32_t, 3> c{0, 0, 0};
    std::size_t rest = cell;
    for (int a = ndim_ - 1; a >= 0; --a) {
        c[a] = static_cast<std::uint32_t>(rest % extent_[a]);
        rest /= extent_[a];
    }
    return c;
}

CellIndex FilteredComplex::cell_at(const std::array<std::uint32_t, 3>& c) const {
    std::size_t idx = 0;
    for (int a = 0; a < ndim_; ++a) idx += c[a] * stride_[a];
    return static_cast<CellIndex>(idx);
}

int FilteredComplex::cell_dim(CellIndex cell) const {
    auto c = coords(cell);
    int d = 0;
    for (int a = 0; a < ndim_; ++a) d += c[a] & 1u;
    return d;
}

CellIndex FilteredComplex::top_cell(PixelIndex pixel) const {
    auto p = shape().coords(pixel);
    std::array<std::uint32_t, 3> c{0, 0, 0};
    for (int a = 0; a < ndim_; ++a) c[a] = static_cast<std::uint32_t>(2 * p[a] + 1);
    return cell_at(c);
}

Cell FilteredComplex::cell(CellIndex index) const {
    Cell out;
    out.coords = coords(index);
    out.dim = cell_dim(index);
    out.filtration_value = value(index);
    out.critical_pixel = critical_pixel(index);
    return out;
}

CellList FilteredComplex::boundary(CellIndex cell) const {
    CellList out;
    auto c = coords(cell);
    for (int a = 0; a < ndim_; ++a) {
        if (c[a] & 1u) {
            out.push(static_cast<CellIndex>(cell - stride_[a]));
            out.push(static_cast<CellIndex>(cell + stride_[a]));
        }
    }
    return out;
}

CellList FilteredComplex::cofaces(CellIndex cell) const {
    CellList out;
    auto c = coords(cell);
    for (int a = 0; a < ndim_; ++a) {
        if ((c[a] & 1u) == 0) {
            if (c[a] > 0) out.push(static_cast<CellIndex>(cell - stride_[a]));
            if (c[a] + 1 < extent_[a]) out.push(static_cast<CellIndex>(cell + stride_[a]));
        }
    }
    return out;
}

bool FilteredComplex::precedes(CellIndex a, CellIndex b) const {
    const double va = internal_value(a), vb = internal_value(b);
    if (va != vb) return va < vb;
    const int da = cell_dim(a), db = cell_dim(b);
    if (da != db) return da < db;
    return a < b;
}

std::size_t FilteredComplex::cells_of_dim(int dim) const {
    // Count of doubled-grid points with exactly `dim` odd coordinates.
    std::array<std::size_t, 4> count{1, 0, 0, 0};
    for (int a = 0; a < ndim_; ++a) {
        const std::size_t odd = extent_[a] / 2, even = extent_[a] - odd;
        std::array<std::size_t, 4> next{0, 0, 0, 0};
        for (int d = 0; d <= a; ++d) {
            next[d] += count[d] * even;
            next[d + 1] += count[d] * odd;
        }
        count = next;
    }
    return dim >= 0 && dim <= ndim_ ? count[dim] : 0;
}

std::vector<std::vector<CellIndex>> FilteredComplex::order_by_dim() const {
    // Counting sort on the critical pixel's value group. Cells are visited in
    // index order, so the sort is stable and equal values stay index-ascending.
    std::uint32_t groups = 0;
    const auto group = pixel_groups(field_.values(), groups);

    std::vector<std::vector<std::uint32_t>> start(ndim_ + 1, std::vector<std::uint32_t>(groups + 1, 0));
    auto for_each_cell = [&](auto&& fn) {
        std::size_t idx = 0;
        for (std::size_t x0 = 0; x0 < extent_[0]; ++x0) {
            const int d0 = static_cast<int>(x0 & 1u);
            for (std::size_t x1 = 0; x1 < extent_[1]; ++x1) {
                const int d1 = d0 + static_cast<int>(x1 & 1u);
                if (ndim_ == 2) {
                    fn(static_cast<CellIndex>(idx++), d1);
                    continue;
                }
                for (std::size_t x2 = 0; x2 < extent_[2]; ++x2) {
                    fn(static_cast<CellIndex>(idx++), d1 + static_cast<int>(x2 & 1u));
                }
            }
        }
    };

    for_each_cell([&](CellIndex c, int d) { ++start[d][group[critical_[c]] + 1]; });
    std::vector<std::vector<CellIndex>> out(ndim_ + 1);
    for (int d = 0; d <= ndim_; ++d) {
        auto& s = start[d];
        std::partial_sum(s.begin(), s.end(), s.begin());
        out[d].resize(s.back());
    }
    for_each_cell([&](CellIndex c, int d) { out[d][start[d][group[critical_[c]]]++] = c; });
    return out;
}

std::vector<CellIndex> FilteredComplex::filtration_order() const {
    std::vector<CellIndex> order(cell_count());
    std::iota(order.begin(), order.end(), CellIndex{0});
    std::sort(order.begin(), order.end(), [this](CellIndex a, CellIndex b) { return precedes(a, b); });
    return order;
}

FilteredComplex build_superlevel(const ScalarField& field) { return FilteredComplex(field); }

std::vector<PixelIndex> superlevel_membership(const FilteredComplex& complex, double p) {
    std::vector<PixelIndex> out;
    const auto values = complex.field().values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= p) out.push_back(PixelIndex{static_cast<std::uint32_t>(i)});
    }
    return out;
}

}  // namespace topoprior
