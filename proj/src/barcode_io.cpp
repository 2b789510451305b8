#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "topoprior/persistence.hpp"

namespace topoprior {

namespace {

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string barcode_to_csv(const Barcode& barcode) {
    std::string out;
    for (const auto& p : barcode.all()) {
        out += std::to_string(p.dim) + "," + num(p.birth) + "," + num(p.death) + "," +
               std::to_string(p.birth_pixel.value) + "," +
               (p.death_pixel ? std::to_string(p.death_pixel->value) : std::string()) + "," +
               (p.essential ? "true" : "false") + "\n";
    }
    return out;
}

std::string barcode_to_json(const Barcode& barcode) {
    auto arr = nlohmann::json::array();
    for (const auto& p : barcode.all()) {
        arr.push_back({{"dim", p.dim},
                       {"birth", p.birth},
                       {"death", p.death},
                       {"birth_pixel", p.birth_pixel.value},
                       {"death_pixel", p.death_pixel ? nlohmann::json(p.death_pixel->value) : nlohmann::json(nullptr)},
                       {"essential", p.essential}});
    }
    return arr.dump(2) + "\n";
}

// One horizontal bar per pair from death to birth on a filtration-value axis,
// grouped by dimension (red, green, blue) and longest first within a group.
std::string barcode_to_svg(const Barcode& barcode) {
    static constexpr const char* colors[] = {"#d62728", "#2ca02c", "#1f77b4"};
    constexpr double width = 640, left = 50, right = 20, top = 30, bottom = 40, row = 6, gap = 2;

    const auto bars = barcode.all();  // already dimension-major, persistence-descending
    double lo = 0.0, hi = 1.0;
    for (const auto& b : bars) {
        lo = std::min({lo, b.death, b.birth});
        hi = std::max({hi, b.death, b.birth});
    }
    const double plot_w = width - left - right;
    const double height = top + bottom + std::max<double>(1.0, static_cast<double>(bars.size())) * (row + gap);
    auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * plot_w; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
    for (int k = 0; k < barcode.ndim() && k < 3; ++k) {
        svg << "<rect x=\"" << left + 90 * k << "\" y=\"8\" width=\"10\" height=\"10\" fill=\"" << colors[k]
            << "\"/><text x=\"" << left + 90 * k + 14 << "\" y=\"17\">dim " << k << "</text>\n";
    }
    double y = top;
    for (const auto& b : bars) {
        const double x0 = x_of(std::min(b.birth, b.death)), x1 = x_of(std::max(b.birth, b.death));
        svg << "<rect x=\"" << fixed(x0) << "\" y=\"" << fixed(y) << "\" width=\"" << fixed(std::max(x1 - x0, 0.5))
            << "\" height=\"" << row << "\" fill=\"" << colors[std::min(b.dim, 2)] << "\"/>\n";
        y += row + gap;
    }
    const double axis_y = height - bottom + 8;
    svg << "<line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\"" << left + plot_w << "\" y2=\"" << axis_y
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg << "<line x1=\"" << fixed(x_of(v)) << "\" y1=\"" << axis_y << "\" x2=\"" << fixed(x_of(v)) << "\" y2=\""
            << axis_y + 4 << "\" stroke=\"black\"/><text x=\"" << fixed(x_of(v)) << "\" y=\"" << axis_y + 16
            << "\" text-anchor=\"middle\">" << fixed(v) << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 4
        << "\" text-anchor=\"middle\">filtration value</text>\n";
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace topoprior
