#pragma once

// Scale-decay exponents of shearlet coefficients, the expected exponent
// arithmetic of the direct and inverse theorems, and the D1/D2 wavefront map.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "generators.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "xform.hpp"

namespace shearscope {

inline constexpr int kMinFitScales = 6;

struct SlopeFit {
    double slope = 0;  // k in |SH| ~ C a^k; +inf when at floor
    double r2 = 0;
    bool at_floor = false;
    int used = 0;
};

// Least squares of log|SH| against log a over the samples above `floor`.
// Exact zeros (log = -inf) never count, whatever the floor.
inline SlopeFit fit_log_slope(const std::vector<double>& log_a, const std::vector<double>& log_mag, double log_floor) {
    SlopeFit out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (std::size_t i = 0; i < log_a.size(); ++i) {
        if (!std::isfinite(log_mag[i]) || !(log_mag[i] >= log_floor)) continue;
        const double x = log_a[i], y = log_mag[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    out.used = n;
    if (n < kMinFitScales) {
        out.at_floor = true;
        out.slope = kInf;
        out.r2 = 0;
        return out;
    }
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    out.slope = cxy / vx;
    out.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    return out;
}

inline double volume_floor(const CoeffVolume& vol, double relative = 1e-12) {
    double m = 0;
    for (const auto& c : vol.coeffs) m = std::max(m, std::abs(c));
    return relative * m;
}

// Decay exponent at one (t, s) node using the scale indices [i_lo, i_hi].
inline SlopeFit decay_slope(const CoeffVolume& vol, int t1, int t2, int s_index, int i_lo, int i_hi, double floor) {
    if (i_lo < 0 || i_hi >= static_cast<int>(vol.a_grid.size()) || i_hi - i_lo + 1 < kMinFitScales)
        throw ConfigError("decay fit range needs >= " + std::to_string(kMinFitScales) + " scales inside the volume");
    if (s_index < 0 || s_index >= static_cast<int>(vol.s_grid.size())) throw ConfigError("shear index out of range");
    std::vector<double> la, lm;
    for (int i = i_lo; i <= i_hi; ++i) {
        la.push_back(std::log(vol.a_grid[i]));
        const double m = std::abs(vol.at(i, s_index, t1, t2));
        lm.push_back(m > 0 ? std::log(m) : -kInf);
    }
    return fit_log_slope(la, lm, floor > 0 ? std::log(floor) : -kInf);
}

// Scale indices of `a_grid` inside [lo, hi] (with a small tolerance).
inline std::pair<int, int> scale_range(const std::vector<double>& a_grid, double lo, double hi) {
    int i_lo = -1, i_hi = -1;
    for (int i = 0; i < static_cast<int>(a_grid.size()); ++i)
        if (a_grid[i] >= lo * (1 - 1e-9) && a_grid[i] <= hi * (1 + 1e-9)) {
            if (i_lo < 0) i_lo = i;
            i_hi = i;
        }
    if (i_lo < 0) throw ConfigError("no scales inside the requested fit range");
    return {i_lo, i_hi};
}

// --- exponent arithmetic

struct ExpectedExponentBudget {
    double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN: optimize over the grid
    double M = kInf, N = kInf, L = kInf, P = kInf, K = kInf, L1 = kInf, L2 = kInf;
};

// alpha_k = 1/2 + k/200, k = 1..99.
inline std::vector<double> alpha_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 99; ++k) g.push_back(0.5 + k / 200.0);
    return g;
}

inline void validate_budget(const ExpectedExponentBudget& b) {
    if (!std::isnan(b.alpha) && !(b.alpha > 0.5 && b.alpha < 1)) throw ConfigError("alpha must lie in (1/2, 1)");
}

inline std::vector<double> budget_alphas(const ExpectedExponentBudget& b) {
    validate_budget(b);
    return std::isnan(b.alpha) ? alpha_grid() : std::vector<double>{b.alpha};
}

// Exponent of min(a^{-3/4+P/2}, a^{(1-a)M}, a^{-3/4+aN}, a^{(a-1/2)L}) decay,
// maximized over alpha. +inf means rapid decay.
inline double expected_direct_exponent(const ExpectedExponentBudget& b) {
    double best = -kInf;
    for (double al : budget_alphas(b)) {
        const double e = std::min({-0.75 + b.P / 2, (1 - al) * b.M, -0.75 + al * b.N, (al - 0.5) * b.L});
        best = std::max(best, e);
    }
    return best;
}

struct InverseBudget {
    double n_sup = 0;   // every N < n_sup is certified (strict)
    double alpha = 0;   // maximizing alpha
    bool certified = false;  // some N >= 0 certified
};

// N + 2 < min(K - 3/4, (1-a)(M+N) - 3/4, (a-1/2)L - 3/4, 2(L2-M+1), 2(L1+1)),
// solved for N at each alpha: every term is linear in N.
inline InverseBudget expected_inverse_budget(const ExpectedExponentBudget& b) {
    InverseBudget out;
    out.n_sup = -kInf;
    for (double al : budget_alphas(b)) {
        double n = b.K - 2.75;
        n = std::min(n, std::isinf(b.M) ? kInf : ((1 - al) * b.M - 2.75) / al);
        n = std::min(n, (al - 0.5) * b.L - 2.75);
        n = std::min(n, std::isinf(b.L2) ? kInf : 2 * (b.L2 - b.M + 1) - 2);
        n = std::min(n, 2 * b.L1);
        if (n > out.n_sup) {
            out.n_sup = n;
            out.alpha = al;
        }
    }
    out.certified = out.n_sup > 0;
    return out;
}

// --- wavefront map

struct WavefrontOptions {
    std::vector<double> a_grid;  // fit scales (>= 6)
    std::vector<double> s_grid;  // shared by both charts, must cover [-1, 1]
    double threshold = 2.0;
    double floor_relative = 1e-12;
};

// Fit scales a in [6h, 12h] at 8 per octave; shears on [-1, 1] with step 1/16.
inline WavefrontOptions default_wavefront_options(const GridMeta& g) {
    WavefrontOptions o;
    o.a_grid = make_scale_grid(6 * g.spacing, 12 * g.spacing, 8);
    o.s_grid = make_shear_grid(1.0, 1.0 / 16);
    return o;
}

struct ChartMap {
    Chart chart = Chart::horizontal;
    std::vector<double> s_grid;  // shear (D1) or sigma = 1/s (D2) values
    std::vector<float> slope, r2;  // (j, t row-major), +inf at floor
    std::vector<unsigned char> at_floor, in_d;

    std::size_t index(std::size_t j, std::size_t t, std::size_t plane) const { return j * plane + t; }
};

struct WavefrontMap {
    GridMeta meta;
    std::vector<double> a_grid;
    double threshold = 2, floor = 0;
    ChartMap d1, d2;  // d2 keeps only |sigma| < 1
    std::string label;

    std::size_t detected_count() const {
        std::size_t n = 0;
        for (auto v : d1.in_d) n += !v;
        for (auto v : d2.in_d) n += !v;
        return n;
    }
};

namespace detail {

// log|SH| for every (i, j, t) of one chart, stored as floats.
inline std::vector<float> log_magnitudes(const Spectrum2D& F, const ShearletSpec& spec, const WavefrontOptions& o,
                                         Chart chart, double& max_mag) {
    const std::size_t plane = F.meta.size(), ns = o.s_grid.size();
    std::vector<float> out(o.a_grid.size() * ns * plane);
    std::vector<double> plane_max(o.a_grid.size() * ns, 0.0);
    for_each_plane(F, spec, o.a_grid, o.s_grid, chart, [&](std::size_t i, std::size_t j, const SampledField2D& p) {
        float* dst = out.data() + (i * ns + j) * plane;
        double m = 0;
        for (std::size_t t = 0; t < plane; ++t) {
            const double v = std::abs(p.values[t]);
            m = std::max(m, v);
            dst[t] = v > 0 ? static_cast<float>(std::log(v)) : -std::numeric_limits<float>::infinity();
        }
        plane_max[i * ns + j] = m;
    });
    for (double m : plane_max) max_mag = std::max(max_mag, m);
    return out;
}

// Max over the 3x3 periodic t-neighbourhood and the adjacent shears: the
// decay of this envelope is the decay with a constant uniform over the box.
inline void envelope(std::vector<float>& logm, std::size_t na, std::size_t ns, int n1, int n2) {
    const std::size_t plane = static_cast<std::size_t>(n1) * n2;
    parallel_for(na, [&](std::size_t i) {
        std::vector<float> tmp(plane), box(ns * plane);
        for (std::size_t j = 0; j < ns; ++j) {
            const float* src = logm.data() + (i * ns + j) * plane;
            for (int a = 0; a < n1; ++a)
                for (int b = 0; b < n2; ++b) {
                    const int bm = (b + n2 - 1) % n2, bp = (b + 1) % n2;
                    const std::size_t row = static_cast<std::size_t>(a) * n2;
                    tmp[row + b] = std::max({src[row + bm], src[row + b], src[row + bp]});
                }
            float* dst = box.data() + j * plane;
            for (int a = 0; a < n1; ++a) {
                const std::size_t am = static_cast<std::size_t>((a + n1 - 1) % n1) * n2,
                                  ap = static_cast<std::size_t>((a + 1) % n1) * n2,
                                  row = static_cast<std::size_t>(a) * n2;
                for (int b = 0; b < n2; ++b) dst[row + b] = std::max({tmp[am + b], tmp[row + b], tmp[ap + b]});
            }
        }
        for (std::size_t j = 0; j < ns; ++j) {
            float* dst = logm.data() + (i * ns + j) * plane;
            const std::size_t jl = j > 0 ? j - 1 : j, jh = j + 1 < ns ? j + 1 : j;
            for (std::size_t t = 0; t < plane; ++t)
                dst[t] = std::max({box[jl * plane + t], box[j * plane + t], box[jh * plane + t]});
        }
    });
}

inline ChartMap fit_chart(const std::vector<float>& env, const WavefrontOptions& o, Chart chart, std::size_t plane,
                          double log_floor, bool open_interval) {
    const std::size_t na = o.a_grid.size(), ns = o.s_grid.size();
    ChartMap m;
    m.chart = chart;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < ns; ++j)
        if (!open_interval || std::abs(o.s_grid[j]) < 1 - 1e-12) keep.push_back(j);
    for (auto j : keep) m.s_grid.push_back(o.s_grid[j]);
    m.slope.resize(keep.size() * plane);
    m.r2.resize(keep.size() * plane);
    m.at_floor.resize(keep.size() * plane);
    m.in_d.resize(keep.size() * plane);
    std::vector<double> la(na);
    for (std::size_t i = 0; i < na; ++i) la[i] = std::log(o.a_grid[i]);
    parallel_for(keep.size(), [&](std::size_t jj) {
        const std::size_t j = keep[jj];
        std::vector<double> lm(na);
        for (std::size_t t = 0; t < plane; ++t) {
            for (std::size_t i = 0; i < na; ++i) lm[i] = env[(i * ns + j) * plane + t];
            const SlopeFit f = fit_log_slope(la, lm, log_floor);
            const std::size_t k = jj * plane + t;
            m.slope[k] = static_cast<float>(f.slope);
            m.r2[k] = static_cast<float>(f.r2);
            m.at_floor[k] = f.at_floor;
            m.in_d[k] = f.at_floor || f.slope >= o.threshold;
        }
    });
    return m;
}

}  // namespace detail

// D1 from the horizontal system over s in [-1, 1]; D2 from the dual system in
// the sigma = 1/s chart, keeping |sigma| < 1 since |s| = 1 belongs to D1.
inline WavefrontMap wavefront_map(const SampledField2D& f, const ShearletSpec& spec, const WavefrontOptions& o) {
    if (!(o.threshold > 0)) throw ConfigError("threshold_k must be > 0");
    if (static_cast<int>(o.a_grid.size()) < kMinFitScales)
        throw ConfigError("wavefront fit needs >= " + std::to_string(kMinFitScales) + " scales");
    validate_grids(o.a_grid, o.s_grid);
    if (o.s_grid.front() > -1 + 1e-12 || o.s_grid.back() < 1 - 1e-12)
        throw ConfigError("wavefront shear grid must cover [-1, 1]");
    WavefrontMap out;
    out.meta = f.meta;
    out.a_grid = o.a_grid;
    out.threshold = o.threshold;
    out.label = spec.label;
    const Spectrum2D F = dft_forward(f);
    double max_mag = 0;
    auto h = detail::log_magnitudes(F, spec, o, Chart::horizontal, max_mag);
    auto v = detail::log_magnitudes(F, spec, o, Chart::vertical, max_mag);
    out.floor = o.floor_relative * max_mag;
    const double log_floor = out.floor > 0 ? std::log(out.floor) : kInf;
    const auto& g = f.meta;
    detail::envelope(h, o.a_grid.size(), o.s_grid.size(), g.n1, g.n2);
    detail::envelope(v, o.a_grid.size(), o.s_grid.size(), g.n1, g.n2);
    out.d1 = detail::fit_chart(h, o, Chart::horizontal, g.size(), log_floor, false);
    out.d2 = detail::fit_chart(v, o, Chart::vertical, g.size(), log_floor, true);
    return out;
}

// Columns t1,t2,s,slope,r2,in_D,chart. D2 rows carry s = 1/sigma ("inf" at
// sigma = 0) and at-floor slopes are written as "inf". `stride` thins t.
inline void write_wavefront_csv(std::ostream& os, const WavefrontMap& m, int stride = 1) {
    if (stride < 1) throw ConfigError("csv stride must be >= 1");
    const auto& g = m.meta;
    os << "t1,t2,s,slope,r2,in_D,chart\n";
    auto num = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : detail::fmt_double(v); };
    for (const ChartMap* c : {&m.d1, &m.d2}) {
        const bool dual = c->chart == Chart::vertical;
        for (std::size_t j = 0; j < c->s_grid.size(); ++j) {
            const double s = dual ? (c->s_grid[j] == 0 ? kInf : 1.0 / c->s_grid[j]) : c->s_grid[j];
            for (int i = 0; i < g.n1; i += stride)
                for (int k = 0; k < g.n2; k += stride) {
                    const std::size_t idx = j * g.size() + static_cast<std::size_t>(i) * g.n2 + k;
                    os << detail::fmt_double(g.x1(i)) << ',' << detail::fmt_double(g.x2(k)) << ',' << num(s) << ','
                       << num(c->slope[idx]) << ',' << detail::fmt_double(c->r2[idx]) << ','
                       << (c->in_d[idx] ? 1 : 0) << ',' << (dual ? "D2" : "D1") << '\n';
                }
        }
    }
}

// Min slope over all shears of both charts per t, mapped linearly from
// [-1, 2*threshold] to [0, 255]; at-floor everywhere maps to 255.
inline void write_wavefront_pgm(std::ostream& os, const WavefrontMap& m) {
    const auto& g = m.meta;
    os << "P5\n" << g.n2 << ' ' << g.n1 << "\n255\n";
    const double lo = -1, hi = 2 * m.threshold;
    std::vector<unsigned char> px(g.size());
    for (std::size_t t = 0; t < g.size(); ++t) {
        double mn = kInf;
        for (const ChartMap* c : {&m.d1, &m.d2})
            for (std::size_t j = 0; j < c->s_grid.size(); ++j) mn = std::min(mn, static_cast<double>(c->slope[j * g.size() + t]));
        const double x = std::clamp((mn - lo) / (hi - lo), 0.0, 1.0);
        px[t] = static_cast<unsigned char>(std::lround(255 * x));
    }
    os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

inline nlohmann::json to_json(const WavefrontMap& m) {
    auto count = [](const ChartMap& c) {
        std::size_t n = 0;
        for (auto v : c.in_d) n += !v;
        return n;
    };
    return {{"label", m.label},
            {"threshold_k", m.threshold},
            {"floor", m.floor},
            {"a_fit_range", {m.a_grid.front(), m.a_grid.back()}},
            {"scales", m.a_grid.size()},
            {"d1_shears", m.d1.s_grid.size()},
            {"d2_shears", m.d2.s_grid.size()},
            {"detected_d1", count(m.d1)},
            {"detected_d2", count(m.d2)}};
}

}  // namespace shearscope
