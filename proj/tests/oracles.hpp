#pragma once

// Independent reference implementations used only by tests. They favour
// obviousness over speed and deliberately avoid the library's code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "eqn/corpus.hpp"

namespace oracle {

using eqn::IntensityVector;
using eqn::LabelSet;

inline std::uint32_t mask_of(const LabelSet& s) {
    std::uint32_t m = 0;
    for (auto j : s) m |= 1U << j;
    return m;
}

inline int popcount(std::uint32_t m) { return __builtin_popcount(m); }

struct Prf {
    double precision, recall, f1;
};

// Per-sample scores through bitmasks, averaged.
inline Prf sample_metrics(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
    double p = 0, r = 0, f = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::uint32_t t = mask_of(gold[i]);
        std::uint32_t h = mask_of(pred[i]);
        int inter = popcount(t & h);
        double pi, ri;
        if (t == 0 && h == 0) {
            pi = ri = 1.0;
        } else {
            pi = h == 0 ? 0.0 : double(inter) / popcount(h);
            ri = t == 0 ? 0.0 : double(inter) / popcount(t);
        }
        double fi = (pi + ri) == 0 ? 0.0 : 2 * pi * ri / (pi + ri);
        if (t == 0 && h == 0) fi = 1.0;
        p += pi;
        r += ri;
        f += fi;
    }
    double m = double(gold.size());
    return {p / m, r / m, f / m};
}

struct LabelPrf {
    std::vector<Prf> rows;
    Prf macro, std;
};

// Per-label confusion counting, label-major loop order.
inline LabelPrf per_label(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred,
                          std::size_t C) {
    LabelPrf out;
    for (std::size_t j = 0; j < C; ++j) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            bool g = std::count(gold[i].begin(), gold[i].end(), j) > 0;
            bool p = std::count(pred[i].begin(), pred[i].end(), j) > 0;
            tp += g && p;
            fp += !g && p;
            fn += g && !p;
        }
        double prec = tp + fp == 0 ? 0 : tp / (tp + fp);
        double rec = tp + fn == 0 ? 0 : tp / (tp + fn);
        double f1 = prec + rec == 0 ? 0 : 2 * prec * rec / (prec + rec);
        out.rows.push_back({prec, rec, f1});
    }
    auto mean_of = [&](auto field) {
        double s = 0;
        for (const auto& r : out.rows) s += field(r);
        return s / double(C);
    };
    auto std_of = [&](auto field, double mu) {
        double s = 0;
        for (const auto& r : out.rows) s += (field(r) - mu) * (field(r) - mu);
        return std::sqrt(s / double(C));
    };
    auto P = [](const Prf& r) { return r.precision; };
    auto R = [](const Prf& r) { return r.recall; };
    auto F = [](const Prf& r) { return r.f1; };
    out.macro = {mean_of(P), mean_of(R), mean_of(F)};
    out.std = {std_of(P, out.macro.precision), std_of(R, out.macro.recall), std_of(F, out.macro.f1)};
    return out;
}

// Full stable sort by descending value; stable keeps ascending index on ties.
inline LabelSet top_k(const IntensityVector& v, std::size_t k) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] > v[b]; });
    LabelSet out(idx.begin(), idx.begin() + long(k));
    std::sort(out.begin(), out.end());
    return out;
}

// Rank (0-based) of label j: how many labels beat it under the tie rule.
inline std::size_t rank_of(const IntensityVector& v, std::size_t j) {
    std::size_t r = 0;
    for (std::size_t l = 0; l < v.size(); ++l) {
        if (v[l] > v[j] || (v[l] == v[j] && l < j)) ++r;
    }
    return r;
}

// Covariance-formula Pearson: E[xy] - E[x]E[y] over sqrt of the variances.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double n = double(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    double cov = sxy / n - (sx / n) * (sy / n);
    double vx = sxx / n - (sx / n) * (sx / n);
    double vy = syy / n - (sy / n) * (sy / n);
    if (vx <= 1e-15 || vy <= 1e-15) return 0.0;
    return cov / std::sqrt(vx * vy);
}

// Random sorted label set over C labels with the given inclusion probability.
inline LabelSet random_set(std::mt19937_64& rng, std::size_t C, double p) {
    std::bernoulli_distribution coin(p);
    LabelSet s;
    for (std::size_t j = 0; j < C; ++j) {
        if (coin(rng)) s.push_back(j);
    }
    return s;
}

// Values drawn from a small grid so ties are frequent.
inline IntensityVector random_vector(std::mt19937_64& rng, std::size_t C, bool coarse) {
    IntensityVector v(C);
    std::uniform_int_distribution<int> grid(0, 4);
    std::uniform_real_distribution<double> real(0.0, 10.0);
    for (auto& x : v) x = coarse ? 2.5 * grid(rng) : real(rng);
    return v;
}

}  // namespace oracle
