#include "topoprior/persistence.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace topoprior {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

/// Union-find whose roots are always the oldest member of their component.
/// `older(a, b)` decides which of two roots survives a merge.
template <class Older>
class ElderForest {
public:
    ElderForest(std::size_t n, Older older) : parent_(n), older_(older) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Merges the components of two distinct roots and returns the root that
    /// dies (the younger one).
    std::uint32_t merge(std::uint32_t ra, std::uint32_t rb) {
        if (older_(rb, ra)) std::swap(ra, rb);
        parent_[rb] = ra;
        return rb;
    }

private:
    std::vector<std::uint32_t> parent_;
    Older older_;
};

class PairingEngine {
public:
    explicit PairingEngine(const FilteredComplex& complex)
        : cx_(complex), d_(complex.ndim()), order_(complex.order_by_dim()), rank_(complex.cell_count()),
          paired_(complex.cell_count(), false) {
        for (const auto& cells : order_) {
            for (std::uint32_t i = 0; i < cells.size(); ++i) rank_[cells[i]] = i;
        }
    }

    std::vector<CellPair> run(Engine engine) {
        if (engine == Engine::reduction) {
            for (int k = d_; k >= 1; --k) reduce(k);
            collect_unpaired();
        } else {
            pair_top_dimension();
            pair_vertices();
            for (int k = 1; k + 1 < d_; ++k) coreduce(k);
        }
        check_counts();
        return std::move(pairs_);
    }

private:
    void add_pair(int dim, CellIndex birth, CellIndex death) {
        pairs_.push_back(CellPair{dim, birth, death});
        paired_[birth] = true;
        paired_[death] = true;
    }

    std::array<std::uint32_t, 3> coords(CellIndex c) const { return cx_.coords(c); }

    // Dimension 0: merge components along edges in filtration order. The
    // younger component's oldest vertex dies at the merging edge.
    void pair_vertices() {
        std::array<std::size_t, 3> vext{1, 1, 1};
        for (int a = 0; a < d_; ++a) vext[a] = cx_.shape()[a] + 1;
        const std::array<std::size_t, 3> vstride{vext[1] * vext[2], vext[2], 1};
        const std::size_t nverts = vext[0] * vext[1] * vext[2];

        auto vertex_cell = [&](std::uint32_t v) {
            std::array<std::uint32_t, 3> c{0, 0, 0};
            std::size_t rest = v;
            for (int a = d_ - 1; a >= 0; --a) {
                c[a] = static_cast<std::uint32_t>(2 * (rest % vext[a]));
                rest /= vext[a];
            }
            return cx_.cell_at(c);
        };
        auto older = [&](std::uint32_t a, std::uint32_t b) { return rank_[vertex_cell(a)] < rank_[vertex_cell(b)]; };
        ElderForest forest(nverts, older);

        for (CellIndex edge : order_[1]) {
            if (paired_[edge]) continue;  // cleared: closes a loop
            auto c = coords(edge);
            std::size_t lo = 0, hi = 0;
            for (int a = 0; a < d_; ++a) {
                if (c[a] & 1u) {
                    lo += ((c[a] - 1) / 2) * vstride[a];
                    hi += ((c[a] + 1) / 2) * vstride[a];
                } else {
                    lo += (c[a] / 2) * vstride[a];
                    hi += (c[a] / 2) * vstride[a];
                }
            }
            auto ra = forest.find(static_cast<std::uint32_t>(lo));
            auto rb = forest.find(static_cast<std::uint32_t>(hi));
            if (ra == rb) continue;
            auto dead = forest.merge(ra, rb);
            add_pair(0, vertex_cell(dead), edge);
        }
        CellIndex first = order_[0].front();
        pairs_.push_back(CellPair{0, first, std::nullopt});
        paired_[first] = true;
    }

    // Dimension d-1 by duality: top cells are nodes, (d-1)-cells are edges
    // between the cubes they separate (or the outside), processed in reverse
    // filtration order. A merge pairs the (d-1)-cell with the latest-added
    // top cell of the component that joins last in reverse, i.e. the one
    // whose newest cube is earliest in the forward order.
    void pair_top_dimension() {
        const std::size_t npix = cx_.field().size();
        const auto outside = static_cast<std::uint32_t>(npix);
        const Shape& shape = cx_.shape();
        std::vector<std::uint32_t> age(npix + 1);
        for (std::size_t p = 0; p < npix; ++p) {
            age[p] = rank_[cx_.top_cell(PixelIndex{static_cast<std::uint32_t>(p)})];
        }
        age[npix] = kNone;
        auto older = [&](std::uint32_t a, std::uint32_t b) { return age[a] > age[b]; };
        ElderForest forest(npix + 1, older);

        const std::array<std::size_t, 3> pstride{d_ == 3 ? shape[1] * shape[2] : shape[1], d_ == 3 ? shape[2] : 1, 1};
        const auto& faces = order_[d_ - 1];
        for (auto it = faces.rbegin(); it != faces.rend(); ++it) {
            const CellIndex face = *it;
            auto c = coords(face);
            std::size_t base = 0;
            int axis = -1;
            for (int a = 0; a < d_; ++a) {
                if (c[a] & 1u) base += ((c[a] - 1) / 2) * pstride[a];
                else axis = a;
            }
            const std::size_t x = c[axis];
            std::uint32_t lo = x > 0 ? static_cast<std::uint32_t>(base + (x / 2 - 1) * pstride[axis]) : outside;
            std::uint32_t hi = x / 2 < shape[axis] ? static_cast<std::uint32_t>(base + (x / 2) * pstride[axis]) : outside;
            auto ra = forest.find(lo);
            auto rb = forest.find(hi);
            if (ra == rb) continue;
            auto dead = forest.merge(ra, rb);
            add_pair(d_ - 1, face, cx_.top_cell(PixelIndex{dead}));
        }
    }

    // Column reduction over GF(2) of the boundary matrix restricted to
    // columns of dimension `dim`. Columns already paired as births are
    // cleared. Rows are identified by their rank within dimension dim-1;
    // the pivot is the largest rank.
    void reduce(int dim) {
        const auto& rows = order_[dim - 1];
        std::vector<std::uint32_t> owner(rows.size(), kNone);
        std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> stored;
        std::vector<std::uint32_t> heap;

        auto push = [&](std::uint32_t r) {
            heap.push_back(r);
            std::push_heap(heap.begin(), heap.end());
        };
        auto pop_pivot = [&]() -> std::uint32_t {
            while (!heap.empty()) {
                std::pop_heap(heap.begin(), heap.end());
                std::uint32_t top = heap.back();
                heap.pop_back();
                if (!heap.empty() && heap.front() == top) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.pop_back();
                    continue;
                }
                return top;
            }
            return kNone;
        };
        auto push_column = [&](CellIndex column_cell, std::uint32_t skip) {
            if (auto it = stored.find(skip); it != stored.end()) {
                for (std::uint32_t r : it->second)
                    if (r != skip) push(r);
            } else {
                for (CellIndex f : cx_.boundary(column_cell))
                    if (rank_[f] != skip) push(rank_[f]);
            }
        };

        for (CellIndex column : order_[dim]) {
            if (paired_[column]) continue;  // cleared: a birth paired one dimension up
            const CellList faces = cx_.boundary(column);
            std::uint32_t pivot = 0;
            for (CellIndex f : faces) pivot = std::max(pivot, rank_[f]);
            if (owner[pivot] == kNone) {
                owner[pivot] = column;
                add_pair(dim - 1, rows[pivot], column);
                continue;
            }

            heap.clear();
            for (CellIndex f : faces) push(rank_[f]);
            bool added = false;
            while (true) {
                pivot = pop_pivot();
                if (pivot == kNone) break;  // zero column: a birth in this dimension
                if (owner[pivot] == kNone) {
                    owner[pivot] = column;
                    if (added) {
                        std::vector<std::uint32_t> reduced{pivot};
                        for (std::uint32_t r = pop_pivot(); r != kNone; r = pop_pivot()) reduced.push_back(r);
                        stored.emplace(pivot, std::move(reduced));
                    }
                    add_pair(dim - 1, rows[pivot], column);
                    break;
                }
                push_column(owner[pivot], pivot);
                added = true;
            }
        }
    }

    // Cohomology variant: columns are coboundaries of `dim`-cells taken in
    // reverse filtration order, the pivot is the smallest coface rank.
    // Columns of cells already paired as deaths one dimension down are
    // cleared. Yields the same pairs as the homology reduction. Working and
    // stored columns are ascending rank lists; addition is a symmetric
    // difference merge.
    void coreduce(int dim) {
        const auto& rows = order_[dim + 1];
        std::vector<std::uint32_t> owner(rows.size(), kNone);
        std::vector<std::uint32_t> slot(rows.size(), kNone);  // pivot -> stored column, if reduced
        std::vector<std::vector<std::uint32_t>> stored;
        std::vector<std::uint32_t> work, scratch, other;

        auto coboundary = [&](CellIndex cell, std::vector<std::uint32_t>& out) {
            out.clear();
            for (CellIndex f : cx_.cofaces(cell)) out.push_back(rank_[f]);
            std::sort(out.begin(), out.end());
        };

        const auto& columns = order_[dim];
        for (auto it = columns.rbegin(); it != columns.rend(); ++it) {
            const CellIndex column = *it;
            if (paired_[column]) continue;  // cleared: a death one dimension down
            coboundary(column, work);
            if (work.empty()) continue;     // no cofaces: essential
            bool added = false;
            while (!work.empty() && owner[work.front()] != kNone) {
                const std::uint32_t pivot = work.front();
                const std::vector<std::uint32_t>* add = nullptr;
                if (slot[pivot] != kNone) {
                    add = &stored[slot[pivot]];
                } else {
                    coboundary(owner[pivot], other);
                    add = &other;
                }
                scratch.clear();
                std::set_symmetric_difference(work.begin(), work.end(), add->begin(), add->end(),
                                              std::back_inserter(scratch));
                work.swap(scratch);
                added = true;
            }
            if (work.empty()) continue;     // zero column: essential class
            const std::uint32_t pivot = work.front();
            owner[pivot] = column;
            if (added) {
                slot[pivot] = static_cast<std::uint32_t>(stored.size());
                stored.push_back(work);
            }
            add_pair(dim, column, rows[pivot]);
        }
    }

    void collect_unpaired() {
        for (int k = 0; k <= d_; ++k) {
            for (CellIndex c : order_[k]) {
                if (!paired_[c]) {
                    pairs_.push_back(CellPair{k, c, std::nullopt});
                    paired_[c] = true;
                }
            }
        }
    }

    // n_k = (dim-k births) + (dim-(k-1) deaths), and the full grid has a
    // single essential class, in dimension 0.
    void check_counts() const {
        std::vector<std::size_t> finite(d_ + 1, 0), essential(d_ + 1, 0);
        for (const auto& p : pairs_) (p.death ? finite : essential)[p.dim]++;
        for (int k = 0; k <= d_; ++k) {
            std::size_t expected = finite[k] + essential[k] + (k > 0 ? finite[k - 1] : 0);
            if (expected != order_[k].size()) {
                throw std::logic_error("persistence pairing lost cells in dimension " + std::to_string(k));
            }
            if (essential[k] != (k == 0 ? 1u : 0u)) {
                throw std::logic_error("unexpected essential class count in dimension " + std::to_string(k));
            }
        }
    }

    const FilteredComplex& cx_;
    int d_;
    std::vector<std::vector<CellIndex>> order_;
    std::vector<std::uint32_t> rank_;
    std::vector<bool> paired_;
    std::vector<CellPair> pairs_;
};

}  // namespace

bool bar_precedes(const PersistencePair& a, const PersistencePair& b) {
    const double pa = a.persistence(), pb = b.persistence();
    if (pa != pb) return pa > pb;
    if (a.birth != b.birth) return a.birth > b.birth;
    if (a.birth_pixel != b.birth_pixel) return a.birth_pixel < b.birth_pixel;
    return a.death_pixel < b.death_pixel;
}

Barcode::Barcode(int ndim, std::vector<PersistencePair> pairs) : by_dim_(static_cast<std::size_t>(ndim)) {
    for (auto& p : pairs) {
        if (p.dim < 0 || p.dim >= ndim) throw std::invalid_argument("pair dimension out of range");
        if (!p.essential && p.birth == p.death) continue;
        by_dim_[p.dim].push_back(p);
    }
    for (auto& bars : by_dim_) std::sort(bars.begin(), bars.end(), bar_precedes);
}

std::span<const PersistencePair> Barcode::bars(int dim) const {
    if (dim < 0 || dim >= ndim()) return {};
    return by_dim_[dim];
}

std::vector<PersistencePair> Barcode::all() const {
    std::vector<PersistencePair> out;
    for (const auto& bars : by_dim_) out.insert(out.end(), bars.begin(), bars.end());
    return out;
}

std::size_t Barcode::size() const {
    std::size_t n = 0;
    for (const auto& bars : by_dim_) n += bars.size();
    return n;
}

std::vector<CellPair> compute_cell_pairs(const FilteredComplex& complex, Engine engine) {
    return PairingEngine(complex).run(engine);
}

Barcode barcode_from_pairs(const FilteredComplex& complex, std::span<const CellPair> pairs) {
    std::vector<PersistencePair> out;
    for (const auto& cp : pairs) {
        if (cp.dim >= complex.ndim()) continue;
        PersistencePair p;
        p.dim = cp.dim;
        p.birth = complex.value(cp.birth);
        p.birth_pixel = complex.critical_pixel(cp.birth);
        if (cp.death) {
            p.death = complex.value(*cp.death);
            p.death_pixel = complex.critical_pixel(*cp.death);
            if (p.death == p.birth) continue;
        } else {
            p.death = 0.0;
            p.essential = true;
        }
        out.push_back(p);
    }
    return Barcode(complex.ndim(), std::move(out));
}

Barcode compute_barcode(const FilteredComplex& complex, Engine engine) {
    auto pairs = compute_cell_pairs(complex, engine);
    return barcode_from_pairs(complex, pairs);
}

std::vector<std::size_t> betti_at(const Barcode& barcode, double p) {
    std::vector<std::size_t> betti(barcode.ndim(), 0);
    for (int k = 0; k < barcode.ndim(); ++k) {
        for (const auto& bar : barcode.bars(k)) {
            if (p <= bar.birth && (bar.essential || bar.death < p)) ++betti[k];
        }
    }
    return betti;
}

}  // namespace topoprior
