#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "eqn/csv.hpp"
#include "eqn/error.hpp"
#include "eqn/eval.hpp"

namespace eqn {

namespace {

constexpr int kCell = 32;
constexpr int kMargin = 140;

struct Rgb {
    int r, g, b;
};

// Diverging scale: -1 blue, 0 white, +1 red.
Rgb color_for(double v) {
    constexpr Rgb kNeg{59, 76, 192};
    constexpr Rgb kPos{180, 4, 38};
    constexpr Rgb kMid{247, 247, 247};
    const Rgb& end = v < 0.0 ? kNeg : kPos;
    double t = std::clamp(std::abs(v), 0.0, 1.0);
    auto lerp = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    return {lerp(kMid.r, end.r), lerp(kMid.g, end.g), lerp(kMid.b, end.b)};
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

double clean(double v) { return v == 0.0 ? 0.0 : v; }

}  // namespace

std::string format_pearson_csv(const PearsonMatrix& pm) {
    std::string out = "label";
    for (const auto& name : pm.labels) out += "," + csv::quote_if_needed(name);
    out += '\n';
    for (std::size_t i = 0; i < pm.size(); ++i) {
        out += csv::quote_if_needed(pm.labels[i]);
        for (std::size_t j = 0; j < pm.size(); ++j) out += fmt::format(",{:.9f}", clean(pm.at(i, j)));
        out += '\n';
    }
    return out;
}

PearsonMatrix parse_pearson_csv(std::string_view content) {
    auto records = csv::parse(content);
    if (records.empty()) throw DataError("pearson csv: missing header");
    const auto& header = records.front().fields;
    if (header.empty()) throw DataError("pearson csv: empty header");
    PearsonMatrix pm;
    pm.labels.assign(header.begin() + 1, header.end());
    const std::size_t C = pm.labels.size();
    if (records.size() != C + 1) throw DataError("pearson csv: row count does not match header");
    pm.values.resize(C * C);
    pm.constant.assign(C, false);
    for (std::size_t i = 0; i < C; ++i) {
        const auto& row = records[i + 1].fields;
        if (row.size() != C + 1 || row[0] != pm.labels[i]) {
            throw DataError(fmt::format("pearson csv: malformed row {}", i + 1));
        }
        for (std::size_t j = 0; j < C; ++j) {
            const auto& f = row[j + 1];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                throw DataError(fmt::format("pearson csv: bad value '{}' in row {}", f, i + 1));
            }
            pm.values[i * C + j] = v;
        }
        pm.constant[i] = pm.values[i * C + i] == 0.0;
    }
    return pm;
}

std::string format_heatmap_svg(const PearsonMatrix& pm) {
    const int n = static_cast<int>(pm.size());
    const int width = kMargin + n * kCell + 20;
    const int height = kMargin + n * kCell + 20;
    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\">\n",
        width, height, width, height);
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
    for (int i = 0; i < n; ++i) {
        const auto label = escape_xml(pm.labels[static_cast<std::size_t>(i)]);
        int center = kMargin + i * kCell + kCell / 2;
        out += fmt::format(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" "
            "dominant-baseline=\"middle\">{}</text>\n",
            kMargin - 6, center, label);
        out += fmt::format(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"start\" "
            "transform=\"rotate(-60 {} {})\">{}</text>\n",
            center, kMargin - 6, center, kMargin - 6, label);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = clean(pm.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
            auto c = color_for(v);
            int x = kMargin + j * kCell;
            int y = kMargin + i * kCell;
            out += fmt::format(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},{})\"/>\n", x, y,
                kCell, kCell, c.r, c.g, c.b);
            const char* ink = std::abs(v) > 0.6 ? "white" : "black";
            out += fmt::format(
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\" "
                "dominant-baseline=\"middle\" fill=\"{}\">{:.2f}</text>\n",
                x + kCell / 2, y + kCell / 2, ink, v);
        }
    }
    out += "</svg>\n";
    return out;
}

void export_heatmap(const PearsonMatrix& pm, const std::string& csv_path, const std::string& svg_path) {
    csv::write_file(csv_path, format_pearson_csv(pm));
    csv::write_file(svg_path, format_heatmap_svg(pm));
}

}  // namespace eqn
