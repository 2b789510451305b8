#include "topoprior/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace topoprior {

namespace {

class BitColumn {
public:
    explicit BitColumn(std::size_t bits = 0) : words_((bits + 63) / 64, 0) {}

    void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }
    void xor_with(const BitColumn& other) {
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    }
    /// Highest set bit, or -1 for the zero column.
    long highest() const {
        for (std::size_t w = words_.size(); w-- > 0;) {
            if (words_[w]) return static_cast<long>(w * 64 + 63 - __builtin_clzll(words_[w]));
        }
        return -1;
    }

private:
    std::vector<std::uint64_t> words_;
};

/// Explicit cubical complex B(p), built straight from the pixel array.
struct ExplicitComplex {
    int ndim = 0;
    std::array<std::size_t, 3> extent{1, 1, 1};
    std::vector<std::vector<std::size_t>> cells;        // per dim: doubled-grid linear index
    std::map<std::size_t, std::size_t> local;           // doubled-grid index -> index within its dim

    std::array<std::size_t, 3> decode(std::size_t idx) const {
        std::array<std::size_t, 3> c{0, 0, 0};
        for (int a = ndim - 1; a >= 0; --a) {
            c[a] = idx % extent[a];
            idx /= extent[a];
        }
        return c;
    }
    std::size_t encode(const std::array<std::size_t, 3>& c) const {
        std::size_t idx = 0;
        for (int a = 0; a < ndim; ++a) idx = idx * extent[a] + c[a];
        return idx;
    }
};

ExplicitComplex build_explicit(const ScalarField& field, double p) {
    ExplicitComplex cx;
    cx.ndim = field.ndim();
    const Shape& shape = field.shape();
    std::size_t total = 1;
    for (int a = 0; a < cx.ndim; ++a) {
        cx.extent[a] = 2 * shape[a] + 1;
        total *= cx.extent[a];
    }
    cx.cells.resize(cx.ndim + 1);

    for (std::size_t idx = 0; idx < total; ++idx) {
        auto c = cx.decode(idx);
        // The cell is in B(p) iff one of the pixels it touches is >= p.
        std::array<std::vector<std::size_t>, 3> options;
        int dim = 0;
        for (int a = 0; a < 3; ++a) {
            if (a >= cx.ndim) {
                options[a] = {0};
            } else if (c[a] % 2 == 1) {
                options[a] = {(c[a] - 1) / 2};
                ++dim;
            } else {
                if (c[a] > 0) options[a].push_back(c[a] / 2 - 1);
                if (c[a] / 2 < shape[a]) options[a].push_back(c[a] / 2);
            }
        }
        bool inside = false;
        for (auto i : options[0])
            for (auto j : options[1])
                for (auto k : options[2]) {
                    std::array<std::size_t, 3> px{i, j, k};
                    if (field[shape.index(std::span<const std::size_t>(px.data(), cx.ndim))] >= p) inside = true;
                }
        if (inside) {
            cx.local[idx] = cx.cells[dim].size();
            cx.cells[dim].push_back(idx);
        }
    }
    return cx;
}

std::size_t boundary_rank(const ExplicitComplex& cx, int dim) {
    if (dim <= 0 || dim > cx.ndim) return 0;
    const std::size_t rows = cx.cells[dim - 1].size();
    std::vector<long> owner(rows, -1);
    std::vector<BitColumn> reduced;
    std::size_t rank = 0;
    for (std::size_t idx : cx.cells[dim]) {
        BitColumn col(rows);
        auto c = cx.decode(idx);
        for (int a = 0; a < cx.ndim; ++a) {
            if (c[a] % 2 == 0) continue;
            for (int s : {-1, 1}) {
                auto f = c;
                f[a] = static_cast<std::size_t>(static_cast<long>(c[a]) + s);
                col.flip(cx.local.at(cx.encode(f)));
            }
        }
        for (long low = col.highest(); low >= 0; low = col.highest()) {
            if (owner[low] < 0) {
                owner[low] = static_cast<long>(reduced.size());
                reduced.push_back(col);
                ++rank;
                break;
            }
            col.xor_with(reduced[owner[low]]);
        }
    }
    return rank;
}

double epsilon_above(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    double gap = 1.0;
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
    return gap / 2.0;
}

std::string betti_string(const std::vector<std::size_t>& b) {
    std::string s = "(";
    for (std::size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
    return s + ")";
}

}  // namespace

std::vector<std::size_t> superlevel_cell_counts(const ScalarField& field, double p) {
    auto cx = build_explicit(field, p);
    std::vector<std::size_t> counts;
    for (const auto& cells : cx.cells) counts.push_back(cells.size());
    return counts;
}

std::size_t oracle_components(const ScalarField& field, double p) {
    const Shape& shape = field.shape();
    const std::size_t n = field.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const int nd = shape.ndim();
    for (std::size_t i = 0; i < n; ++i) {
        if (field.at(i) < p) continue;
        auto c = shape.coords(PixelIndex{static_cast<std::uint32_t>(i)});
        for (int d0 = -1; d0 <= 1; ++d0)
            for (int d1 = -1; d1 <= 1; ++d1)
                for (int d2 = (nd == 3 ? -1 : 0); d2 <= (nd == 3 ? 1 : 0); ++d2) {
                    std::array<long, 3> q{static_cast<long>(c[0]) + d0, static_cast<long>(c[1]) + d1,
                                          static_cast<long>(c[2]) + d2};
                    bool ok = true;
                    for (int a = 0; a < nd; ++a) ok = ok && q[a] >= 0 && q[a] < static_cast<long>(shape[a]);
                    if (!ok) continue;
                    std::array<std::size_t, 3> qs{static_cast<std::size_t>(q[0]), static_cast<std::size_t>(q[1]),
                                                  static_cast<std::size_t>(q[2])};
                    std::size_t j = shape.index(std::span<const std::size_t>(qs.data(), nd)).value;
                    if (field.at(j) >= p) parent[find(i)] = find(j);
                }
    }
    std::size_t components = 0;
    for (std::size_t i = 0; i < n; ++i) components += field.at(i) >= p && find(i) == i;
    return components;
}

std::vector<std::size_t> oracle_betti(const ScalarField& field, double p) {
    auto cx = build_explicit(field, p);
    std::vector<std::size_t> ranks(cx.ndim + 2, 0);
    for (int k = 1; k <= cx.ndim; ++k) ranks[k] = boundary_rank(cx, k);
    std::vector<std::size_t> betti(cx.ndim, 0);
    for (int k = 0; k < cx.ndim; ++k) betti[k] = cx.cells[k].size() - ranks[k] - ranks[k + 1];
    if (betti[0] != oracle_components(field, p)) {
        throw std::logic_error("oracle disagreement: rank-based beta_0 differs from union-find count");
    }
    return betti;
}

BettiCurve oracle_betti_curve(const ScalarField& field) {
    BettiCurve curve;
    curve.values.assign(field.values().begin(), field.values().end());
    std::sort(curve.values.begin(), curve.values.end(), std::greater<>());
    curve.values.erase(std::unique(curve.values.begin(), curve.values.end()), curve.values.end());
    for (double v : curve.values) curve.betti.push_back(oracle_betti(field, v));
    return curve;
}

Barcode oracle_barcode(const FilteredComplex& complex) {
    const std::size_t n = complex.cell_count();
    if (n > kOracleMaxCells) {
        throw SizeGuardError("reference reduction limited to " + std::to_string(kOracleMaxCells) + " cells; field " +
                             complex.shape().to_string() + " has " + std::to_string(n));
    }
    const auto order = complex.filtration_order();
    std::vector<std::size_t> position(n);
    for (std::size_t i = 0; i < n; ++i) position[order[i]] = i;

    std::vector<long> owner(n, -1);          // row position -> column position
    std::vector<BitColumn> columns(n);
    std::vector<bool> zero(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        BitColumn col(n);
        for (CellIndex f : complex.boundary(order[j])) col.flip(position[f]);
        long low = col.highest();
        while (low >= 0 && owner[low] >= 0) {
            col.xor_with(columns[owner[low]]);
            low = col.highest();
        }
        if (low >= 0) owner[low] = static_cast<long>(j);
        else zero[j] = true;
        columns[j] = std::move(col);
    }

    std::vector<PersistencePair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        if (!zero[i]) continue;  // negative cell
        const CellIndex birth = order[i];
        PersistencePair p;
        p.dim = complex.cell_dim(birth);
        p.birth = complex.value(birth);
        p.birth_pixel = complex.critical_pixel(birth);
        if (owner[i] >= 0) {
            const CellIndex death = order[owner[i]];
            p.death = complex.value(death);
            p.death_pixel = complex.critical_pixel(death);
            if (p.death == p.birth) continue;
        } else {
            p.death = 0.0;
            p.essential = true;
        }
        if (p.dim >= complex.ndim()) throw std::logic_error("top-dimensional class in a full grid");
        pairs.push_back(p);
    }
    return Barcode(complex.ndim(), std::move(pairs));
}

VerifyReport verify_field(const ScalarField& field, const BarcodeEngine& engine) {
    VerifyReport report;
    const FilteredComplex complex(field);
    const Barcode reference = oracle_barcode(complex);
    const Barcode main = engine ? engine(complex) : compute_barcode(complex);

    using Key = std::tuple<int, double, double, std::uint32_t, long, bool>;
    auto keys = [](const Barcode& b) {
        std::vector<Key> out;
        for (const auto& p : b.all()) {
            out.emplace_back(p.dim, p.birth, p.death, p.birth_pixel.value,
                             p.death_pixel ? static_cast<long>(p.death_pixel->value) : -1L, p.essential);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    auto describe = [](const Key& k) {
        std::ostringstream s;
        s << "dim " << std::get<0>(k) << " (" << std::get<1>(k) << ", " << std::get<2>(k) << ") pixels "
          << std::get<3>(k) << "/" << std::get<4>(k);
        return s.str();
    };
    const auto ka = keys(main), kb = keys(reference);
    std::vector<Key> only_main, only_ref;
    std::set_difference(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(only_main));
    std::set_difference(kb.begin(), kb.end(), ka.begin(), ka.end(), std::back_inserter(only_ref));
    for (const auto& k : only_main) report.differences.push_back("engine only: " + describe(k));
    for (const auto& k : only_ref) report.differences.push_back("reference only: " + describe(k));

    const double eps = epsilon_above(field.values());
    std::vector<double> distinct(field.values().begin(), field.values().end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (double v : distinct) {
        for (double p : {v, v + eps}) {
            ++report.probes;
            auto fast = betti_at(main, p);
            auto slow = oracle_betti(field, p);
            if (fast != slow) {
                std::ostringstream s;
                s << "betti at p=" << p << ": engine " << betti_string(fast) << " reference " << betti_string(slow);
                report.differences.push_back(s.str());
            }
        }
    }
    report.ok = report.differences.empty();
    return report;
}

}  // namespace topoprior
