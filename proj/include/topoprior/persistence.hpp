#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topoprior/complex.hpp"

namespace topoprior {

/// One bar of the super-level barcode. Birth >= death; essential classes
/// never die and are cut off at death 0 with no death pixel.
struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;
    PixelIndex birth_pixel;
    std::optional<PixelIndex> death_pixel;
    bool essential = false;

    double persistence() const { return birth > death ? birth - death : death - birth; }

    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

/// Bars grouped by dimension 0..ndim-1, each list ordered by persistence
/// descending, then birth descending, then birth pixel ascending.
/// Zero-persistence pairs are never stored.
class Barcode {
public:
    Barcode() = default;
    Barcode(int ndim, std::vector<PersistencePair> pairs);

    int ndim() const { return static_cast<int>(by_dim_.size()); }
    std::span<const PersistencePair> bars(int dim) const;
    std::vector<PersistencePair> all() const;
    std::size_t size() const;

private:
    std::vector<std::vector<PersistencePair>> by_dim_;
};

/// Strict ordering used inside each dimension of a Barcode.
bool bar_precedes(const PersistencePair& a, const PersistencePair& b);

/// Raw persistence pairing in cell terms, zero-persistence pairs included.
struct CellPair {
    int dim = 0;
    CellIndex birth = 0;
    std::optional<CellIndex> death;  // empty for essential classes
};

enum class Engine {
    /// Union-find for dimension 0 and, through duality, for dimension d-1;
    /// column reduction with clearing for the remaining middle dimension.
    hybrid,
    /// Column reduction with clearing in every dimension, top-down.
    reduction,
};

std::vector<CellPair> compute_cell_pairs(const FilteredComplex& complex, Engine engine = Engine::hybrid);

/// Translates cell pairs to super-level values and pixel provenance and
/// drops zero-persistence pairs.
Barcode barcode_from_pairs(const FilteredComplex& complex, std::span<const CellPair> pairs);

Barcode compute_barcode(const FilteredComplex& complex, Engine engine = Engine::hybrid);

/// beta_k(p): bars of dimension k with death < p <= birth. Essential bars
/// count for every p <= birth.
std::vector<std::size_t> betti_at(const Barcode& barcode, double p);

// Serialization: CSV rows "dim,birth,death,birth_pixel,death_pixel,essential",
// a JSON array of pair objects, and an SVG barcode diagram.
std::string barcode_to_csv(const Barcode& barcode);
std::string barcode_to_json(const Barcode& barcode);
std::string barcode_to_svg(const Barcode& barcode);

}  // namespace topoprior
