#pragma once

#include <stdexcept>
#include <vector>

#include "topoprior/loss.hpp"

namespace topoprior {

struct RefineConfig {
    double lambda = 0.01;      // weight of the topological term
    double lr = 0.05;          // fixed gradient step
    int max_iters = 500;
    double tol = 1e-9;         // stop when |J_prev - J| < tol
    double check_threshold = 0.5;
    bool early_stop = false;   // also stop once the topology check passes and J has plateaued
    int divergence_window = 20;

    void validate() const;
};

struct RefineStep {
    int iter = 0;
    double fidelity = 0.0;     // (1/V) * sum (X' - X)^2
    double topo = 0.0;         // L_topo(X')
    double total = 0.0;        // fidelity + lambda * topo
    double wall_ms = 0.0;
};

struct RefineResult {
    ScalarField refined;
    int iterations = 0;
    std::vector<RefineStep> trajectory;   // entry 0 is the starting point
    bool topology_ok = false;
};

/// Thrown when the objective rises for `divergence_window` consecutive steps.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, RefineResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const RefineResult& partial() const { return partial_; }

private:
    RefineResult partial_;
};

/// Projected gradient descent on
///   J(X') = (1/V) |X' - X|^2 + lambda * L_topo(X')
/// starting from X' = X, with the barcode recomputed every step and X'
/// clamped to [0, 1] after each update. Requires X normalized.
RefineResult refine(const ScalarField& input, const BettiPrior& prior, const RefineConfig& cfg = {});

}  // namespace topoprior
