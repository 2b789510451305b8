#include "topoprior/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace topoprior {

std::size_t BettiPrior::upper(int k) const {
    if (!max_betti.empty() && max_betti.at(k)) return *max_betti.at(k);
    return betti.at(k);
}

void BettiPrior::validate() const {
    if (!weights.empty() && weights.size() != betti.size()) {
        throw std::invalid_argument("prior has " + std::to_string(betti.size()) + " dimensions but " +
                                    std::to_string(weights.size()) + " weights");
    }
    if (!max_betti.empty() && max_betti.size() != betti.size()) {
        throw std::invalid_argument("prior has " + std::to_string(betti.size()) + " dimensions but " +
                                    std::to_string(max_betti.size()) + " windows");
    }
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("prior weights must be finite and >= 0");
    }
    for (int k = 0; k < ndim(); ++k) {
        if (upper(k) < betti[k]) throw std::invalid_argument("window upper bound below desired Betti number");
    }
}

LossReport topo_loss(const Barcode& barcode, const BettiPrior& prior) {
    prior.validate();
    if (prior.ndim() > barcode.ndim()) {
        throw std::invalid_argument("prior names dimension " + std::to_string(prior.ndim() - 1) +
                                    " but the barcode only covers dimensions below " +
                                    std::to_string(barcode.ndim()));
    }
    LossReport report;
    report.per_dim.assign(prior.ndim(), 0.0);
    report.matched.resize(prior.ndim());

    std::map<std::uint32_t, double> pixel_value;
    auto accumulate = [&](const PersistencePair& bar, double d_birth, double d_death) {
        report.grad[bar.birth_pixel.value] += d_birth;
        pixel_value[bar.birth_pixel.value] = bar.birth;
        if (!bar.essential) {
            report.grad[bar.death_pixel->value] += d_death;
            pixel_value[bar.death_pixel->value] = bar.death;
        }
    };

    for (int k = 0; k < prior.ndim(); ++k) {
        const auto bars = barcode.bars(k);
        const std::size_t want = prior.betti[k];
        const std::size_t keep = prior.upper(k);
        const double w = prior.weight(k);
        auto& match = report.matched[k];
        double lk = 0.0;

        for (std::size_t rank = 1; rank <= std::max(bars.size(), want); ++rank) {
            if (rank > bars.size()) {
                // Missing wanted bar: constant penalty, nothing to differentiate.
                lk += 1.0;
                ++match.phantom;
                continue;
            }
            const auto& bar = bars[rank - 1];
            const double len = bar.birth - bar.death;
            if (rank <= want) {
                lk += 1.0 - len * len;
                match.wanted.push_back(rank);
                accumulate(bar, -2.0 * len * w, 2.0 * len * w);
            } else if (rank > keep) {
                lk += len * len;
                match.unwanted.push_back(rank);
                accumulate(bar, 2.0 * len * w, -2.0 * len * w);
            } else {
                match.ignored.push_back(rank);
            }
        }
        report.per_dim[k] = lk;
        report.loss += w * lk;
    }
    // Project onto the [0, 1] box: a pixel already at a bound gets no
    // component that would push it further out.
    for (auto& [pixel, g] : report.grad) {
        const double v = pixel_value[pixel];
        if ((v >= 1.0 && g < 0.0) || (v <= 0.0 && g > 0.0)) g = 0.0;
    }
    std::erase_if(report.grad, [](const auto& kv) { return kv.second == 0.0; });
    return report;
}

LossReport field_loss(const ScalarField& field, const BettiPrior& prior) {
    return topo_loss(compute_barcode(build_superlevel(field)), prior);
}

std::vector<double> LossReport::dense_gradient(std::size_t size) const {
    std::vector<double> out(size, 0.0);
    for (const auto& [pixel, g] : grad) out.at(pixel) = g;
    return out;
}

std::string LossReport::to_json() const {
    nlohmann::json j;
    j["loss"] = loss;
    j["per_dim"] = per_dim;
    auto g = nlohmann::json::array();
    for (const auto& [pixel, value] : grad) g.push_back({pixel, value});
    j["grad"] = std::move(g);
    nlohmann::json matched = nlohmann::json::object();
    for (std::size_t k = 0; k < this->matched.size(); ++k) {
        const auto& m = this->matched[k];
        matched[std::to_string(k)] = {{"wanted", m.wanted},
                                      {"ignored", m.ignored},
                                      {"unwanted", m.unwanted},
                                      {"phantom", m.phantom}};
    }
    j["matched"] = std::move(matched);
    return j.dump(2) + "\n";
}

bool check_topology(const Barcode& barcode, const BettiPrior& prior, double p) {
    prior.validate();
    if (prior.ndim() > barcode.ndim()) throw std::invalid_argument("prior has more dimensions than the field");
    const auto betti = betti_at(barcode, p);
    for (int k = 0; k < prior.ndim(); ++k) {
        if (betti[k] < prior.betti[k] || betti[k] > prior.upper(k)) return false;
    }
    return true;
}

bool check_topology(const ScalarField& field, const BettiPrior& prior, double p) {
    return check_topology(compute_barcode(build_superlevel(field)), prior, p);
}

}  // namespace topoprior
