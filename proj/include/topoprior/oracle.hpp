#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topoprior/persistence.hpp"

namespace topoprior {

// Brute-force reference computations. Deliberately naive: explicit cell
// lists, dense GF(2) linear algebra, no clearing. Use on small inputs only.

/// Raised when an input is too large for the dense reference path.
class SizeGuardError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr std::size_t kOracleMaxCells = 20000;

/// Betti numbers of B(p) from ranks of boundary matrices over GF(2).
/// Beta_0 is also recomputed with a vertex-adjacency union-find over pixels;
/// a disagreement throws std::logic_error.
std::vector<std::size_t> oracle_betti(const ScalarField& field, double p);

/// Connected components of {pixels >= p} where pixels sharing at least a
/// vertex are adjacent (8-connectivity in 2D, 26 in 3D).
std::size_t oracle_components(const ScalarField& field, double p);

/// Vertex, edge, face (and cube) counts of B(p), indexed by dimension.
std::vector<std::size_t> superlevel_cell_counts(const ScalarField& field, double p);

struct BettiCurve {
    std::vector<double> values;                       // distinct pixel values, descending
    std::vector<std::vector<std::size_t>> betti;      // Betti vector of B(value)
};

BettiCurve oracle_betti_curve(const ScalarField& field);

/// Textbook reduction of the full boundary matrix with dense bit columns.
/// Throws SizeGuardError above kOracleMaxCells cells.
Barcode oracle_barcode(const FilteredComplex& complex);

using BarcodeEngine = std::function<Barcode(const FilteredComplex&)>;

struct VerifyReport {
    bool ok = true;
    std::size_t probes = 0;
    std::vector<std::string> differences;
};

/// Compares `engine` (the main engine by default) against both reference
/// paths: exact barcode equality as a multiset of (dim, birth, death, birth
/// pixel, death pixel), and Betti numbers at every distinct pixel value and
/// just above it.
VerifyReport verify_field(const ScalarField& field, const BarcodeEngine& engine = {});

}  // namespace topoprior
