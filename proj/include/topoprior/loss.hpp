#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topoprior/persistence.hpp"

namespace topoprior {

/// Desired Betti numbers, one entry per homology dimension starting at 0.
///
/// For dimension k, bars ranked 1..betti[k] are wanted (pushed to length 1),
/// bars ranked above max_betti[k] (or above betti[k] without a window) are
/// unwanted (pushed to length 0), and ranks in between are ignored. Each
/// dimension's loss is scaled by its weight.
struct BettiPrior {
    std::vector<std::size_t> betti;
    std::vector<double> weights;                           // empty = all 1.0
    std::vector<std::optional<std::size_t>> max_betti;     // empty = no windows

    BettiPrior() = default;
    explicit BettiPrior(std::vector<std::size_t> desired) : betti(std::move(desired)) {}

    int ndim() const { return static_cast<int>(betti.size()); }
    double weight(int k) const { return weights.empty() ? 1.0 : weights.at(k); }
    /// Largest acceptable bar count for dimension k.
    std::size_t upper(int k) const;

    /// Throws std::invalid_argument when weights/windows are inconsistent.
    void validate() const;
};

struct MatchedBars {
    std::vector<std::size_t> wanted;    // 1-based ranks
    std::vector<std::size_t> ignored;
    std::vector<std::size_t> unwanted;
    std::size_t phantom = 0;            // wanted ranks with no bar
};

/// Topological loss and its exact gradient with respect to pixel values.
///
/// The gradient is projected onto the unit box: at a pixel whose value is
/// already >= 1 (<= 0) negative (positive) components are dropped, since a
/// descent step could only push it outside [0, 1]. Inside the box it is the
/// plain derivative. Pixels with zero gradient are absent from `grad`.
struct LossReport {
    double loss = 0.0;
    std::vector<double> per_dim;             // unweighted L_k
    std::map<std::uint32_t, double> grad;    // pixel index -> dL/dS
    std::vector<MatchedBars> matched;

    /// Dense gradient over a field of `size` pixels.
    std::vector<double> dense_gradient(std::size_t size) const;
    std::string to_json() const;
};

LossReport topo_loss(const Barcode& barcode, const BettiPrior& prior);

/// Barcode of the super-level filtration followed by topo_loss.
LossReport field_loss(const ScalarField& field, const BettiPrior& prior);

/// True iff the super-level set at `p` has the prior's Betti numbers (or a
/// count inside the prior's window) in every dimension the prior names.
bool check_topology(const ScalarField& field, const BettiPrior& prior, double p = 0.5);
bool check_topology(const Barcode& barcode, const BettiPrior& prior, double p = 0.5);

}  // namespace topoprior
