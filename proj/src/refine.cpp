#include "topoprior/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace topoprior {

void RefineConfig::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
    if (!std::isfinite(lr) || lr <= 0.0) throw std::invalid_argument("lr must be finite and > 0");
    if (!std::isfinite(tol) || tol < 0.0) throw std::invalid_argument("tol must be finite and >= 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(check_threshold > 0.0 && check_threshold <= 1.0)) {
        throw std::invalid_argument("check threshold must lie in (0, 1]");
    }
    if (divergence_window < 1) throw std::invalid_argument("divergence window must be >= 1");
}

namespace {

struct Evaluation {
    RefineStep step;
    LossReport loss;
    Barcode barcode;
};

Evaluation evaluate(const ScalarField& original, const ScalarField& current, const BettiPrior& prior,
                    double lambda) {
    Evaluation ev;
    const auto x = original.values();
    const auto y = current.values();
    double fidelity = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) fidelity += (y[i] - x[i]) * (y[i] - x[i]);
    ev.step.fidelity = fidelity / static_cast<double>(x.size());
    ev.barcode = compute_barcode(build_superlevel(current));
    ev.loss = topo_loss(ev.barcode, prior);
    ev.step.topo = ev.loss.loss;
    ev.step.total = ev.step.fidelity + lambda * ev.step.topo;
    return ev;
}

}  // namespace

RefineResult refine(const ScalarField& input, const BettiPrior& prior, const RefineConfig& cfg) {
    cfg.validate();
    prior.validate();
    if (!input.normalized()) throw DataError("refine requires a field with values in [0, 1]");

    using clock = std::chrono::steady_clock;
    const std::size_t n = input.size();
    const double inv_v = 1.0 / static_cast<double>(n);
    const auto x = input.values();

    RefineResult result;
    ScalarField current = input;
    auto t0 = clock::now();
    Evaluation ev = evaluate(input, current, prior, cfg.lambda);
    ev.step.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    result.trajectory.push_back(ev.step);

    int rising = 0;
    std::vector<double> next(n);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        t0 = clock::now();
        const auto y = current.values();
        for (std::size_t i = 0; i < n; ++i) next[i] = y[i] - cfg.lr * 2.0 * inv_v * (y[i] - x[i]);
        for (const auto& [pixel, g] : ev.loss.grad) next[pixel] -= cfg.lr * cfg.lambda * g;
        for (double& v : next) v = std::clamp(v, 0.0, 1.0);
        current = input.with_values(next);

        const double previous = ev.step.total;
        ev = evaluate(input, current, prior, cfg.lambda);
        ev.step.iter = it;
        ev.step.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        result.trajectory.push_back(ev.step);
        result.iterations = it;

        const double change = ev.step.total - previous;
        rising = change > 0.0 ? rising + 1 : 0;
        if (rising >= cfg.divergence_window) {
            result.refined = current;
            result.topology_ok = check_topology(ev.barcode, prior, cfg.check_threshold);
            throw DivergenceError("objective increased for " + std::to_string(rising) +
                                      " consecutive iterations (iteration " + std::to_string(it) + ")",
                                  std::move(result));
        }
        if (std::abs(change) < cfg.tol) break;
        if (cfg.early_stop && change < cfg.tol && check_topology(ev.barcode, prior, cfg.check_threshold)) break;
    }
    result.refined = std::move(current);
    result.topology_ok = check_topology(ev.barcode, prior, cfg.check_threshold);
    return result;
}

}  // namespace topoprior
