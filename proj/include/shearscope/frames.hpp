#pragma once

// Frame multiplier Delta, frame bounds, truncation selection, window synthesis
// and multiplier-domain reconstruction for cone-adapted systems.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "admissibility.hpp"
#include "generators.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "xform.hpp"

namespace shearscope {

struct SystemParams {
    double gamma = 1.0;
    double xi = 2.0;
    ConeSpec cone;
};

inline void validate_params(const SystemParams& p) {
    if (!(p.gamma > 0)) throw ConfigError("gamma must be > 0");
    if (!(p.xi > 0)) throw ConfigError("xi must be > 0");
    validate_cone(p.cone);
}

// Delta(xi) = integral over 0 < a < gamma, |s| < Xi of
// |psi_hat(a xi1, sqrt(a)(xi2 - s xi1))|^2 a^{-3/2} da ds.
//
// Evaluated in generator coordinates omega1 = a xi1, omega2 = sqrt(a)(xi2 - s xi1),
// where da ds a^{-3/2} = d omega / omega1^2. For fixed omega1 the shear range is an
// omega2 interval centred at sgn(xi1) r sqrt|xi1 omega1| (r = xi2/xi1) of half-width
// Xi sqrt|xi1 omega1|, so per-row cumulative integrals of |psi_hat|^2 in omega2 give
// each Delta value in O(#omega1 rows).
class DeltaQuadrature {
public:
    explicit DeltaQuadrature(const ShearletSpec& spec, int per_octave = 64, int omega2_per_unit = 64,
                             double cutoff = 0x1p-30)
        : R_(spec.support_radius) {
        const int octaves = static_cast<int>(std::ceil(std::log2(R_ / cutoff)));
        n1_ = octaves * per_octave + 1;
        l0_ = std::log(cutoff);
        dl_ = (std::log(R_) - l0_) / (n1_ - 1);
        n2_ = 2 * static_cast<int>(std::ceil(R_ * omega2_per_unit)) + 1;
        d2_ = 2 * R_ / (n2_ - 1);
        for (int sign = 0; sign < 2; ++sign) {
            auto& tab = table_[sign];
            tab.assign(static_cast<std::size_t>(n1_) * n2_, 0.0);
            const double sg = sign == 0 ? 1.0 : -1.0;
            parallel_for(static_cast<std::size_t>(n1_), [&](std::size_t i) {
                const double w1 = sg * std::exp(l0_ + dl_ * static_cast<double>(i));
                double* row = tab.data() + i * n2_;
                double prev = std::norm(spec(w1, -R_));
                row[0] = 0;
                for (int m = 1; m < n2_; ++m) {
                    const double cur = std::norm(spec(w1, -R_ + m * d2_));
                    row[m] = row[m - 1] + 0.5 * d2_ * (prev + cur);
                    prev = cur;
                }
            });
        }
    }

    // Untruncated when gamma or xi is infinite. Returns 0 on xi1 = 0.
    double operator()(double xi1, double xi2, double gamma, double xi) const {
        if (xi1 == 0) return 0.0;
        const int sign = xi1 > 0 ? 0 : 1;
        const double ax = std::abs(xi1), r = xi2 / xi1, sg = xi1 > 0 ? 1.0 : -1.0;
        const double lmax = std::isfinite(gamma) ? std::log(gamma * ax) : kInf;
        auto row_value = [&](int i) {
            const double w1 = std::exp(l0_ + dl_ * i);
            const double root = std::sqrt(ax * w1);
            double lo = -R_, hi = R_;
            if (std::isfinite(xi)) {
                const double c = sg * r * root, h = xi * root;
                lo = c - h;
                hi = c + h;
            }
            return (cumulative(sign, i, hi) - cumulative(sign, i, lo)) / w1;
        };
        double total = 0, prev = 0;
        for (int i = 0; i < n1_; ++i) {
            const double li = l0_ + dl_ * i;
            if (li > lmax) {
                if (i > 0) {
                    // Partial panel up to lmax with a linearly interpolated end value.
                    const double cur = row_value(i);
                    const double frac = (lmax - (li - dl_)) / dl_;
                    const double fend = prev + frac * (cur - prev);
                    total += 0.5 * (prev + fend) * frac * dl_;
                }
                return total;
            }
            const double cur = row_value(i);
            if (i > 0) total += 0.5 * (prev + cur) * dl_;
            prev = cur;
        }
        return total;
    }

private:
    double cumulative(int sign, int i, double w2) const {
        const double* row = table_[sign].data() + static_cast<std::size_t>(i) * n2_;
        if (w2 <= -R_) return 0.0;
        if (w2 >= R_) return row[n2_ - 1];
        const double pos = (w2 + R_) / d2_;
        const int m = std::min(static_cast<int>(pos), n2_ - 2);
        const double t = pos - m;
        return row[m] + t * (row[m + 1] - row[m]);
    }

    double R_;
    int n1_ = 0, n2_ = 0;
    double l0_ = 0, dl_ = 0, d2_ = 0;
    std::vector<double> table_[2];
};

// Delta_{u,v}(psi) at one frequency; the vertical cone uses swapped coordinates.
inline double delta_at(const DeltaQuadrature& q, const SystemParams& p, double xi1, double xi2) {
    if (!in_cone(p.cone, xi1, xi2)) return 0.0;
    if (p.cone.orientation == Chart::vertical) std::swap(xi1, xi2);
    return q(xi1, xi2, p.gamma, p.xi);
}

// Delta sampled on the centered frequency grid of `g`.
inline std::vector<double> compute_delta(const DeltaQuadrature& q, const SystemParams& p, const GridMeta& g) {
    validate_params(p);
    std::vector<double> out(g.size(), 0.0);
    parallel_for(static_cast<std::size_t>(g.n1), [&](std::size_t k1) {
        for (int k2 = 0; k2 < g.n2; ++k2)
            out[k1 * g.n2 + k2] = delta_at(q, p, g.xi1(static_cast<int>(k1)), g.xi2(k2));
    });
    return out;
}

// Delta_{0,inf} with the cone indicator replaced by 1 (0 on the axis xi1 = 0);
// `swap` evaluates the dual (nu) system.
inline std::vector<double> compute_delta_full(const DeltaQuadrature& q, const GridMeta& g, bool swap) {
    std::vector<double> out(g.size(), 0.0);
    parallel_for(static_cast<std::size_t>(g.n1), [&](std::size_t k1) {
        for (int k2 = 0; k2 < g.n2; ++k2) {
            double x1 = g.xi1(static_cast<int>(k1)), x2 = g.xi2(k2);
            if (swap) std::swap(x1, x2);
            out[k1 * g.n2 + k2] = q(x1, x2, kInf, kInf);
        }
    });
    return out;
}

// Delta realised by the transform's own (a, s) grid and trapezoid weights, the
// exact multiplier of the discrete coefficient energy.
inline double delta_discrete(const ShearletSpec& spec, const std::vector<double>& a, const std::vector<double>& s,
                             Chart chart, double xi1, double xi2) {
    const auto wa = scale_weights(a), ws = shear_weights(s);
    if (chart == Chart::vertical) std::swap(xi1, xi2);
    double total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double row = 0;
        const double sa = std::sqrt(a[i]);
        for (std::size_t j = 0; j < s.size(); ++j) row += ws[j] * std::norm(spec(a[i] * xi1, sa * (xi2 - s[j] * xi1)));
        total += wa[i] * std::pow(a[i], -1.5) * row;
    }
    return total;
}

// --- frame bounds

struct FrameSample {
    double xi1, xi2, delta;
    bool interior;
};

struct FrameReport {
    SystemParams params;
    std::string label;
    std::vector<FrameSample> samples;
    double a_bound = 0, b_bound = 0, ratio = kInf;
    double a_interior = 0, b_interior = 0, ratio_interior = kInf;
    bool is_frame = false;
    std::string verdict;
};

// Sample nodes in the closed cone: |xi1| log-spaced on [u0, 64 u0] plus a
// linear ring on [u0, 2 u0], slopes xi2/xi1 on [-v, v] with step v/32, both
// signs of xi1 (u0 = u, or 1 when u = 0).
inline std::vector<std::pair<double, double>> frame_sample_nodes(const ConeSpec& cone, int resolution) {
    if (resolution < 2) throw ConfigError("frame resolution must be >= 2");
    const double u0 = cone.u > 0 ? cone.u : 1.0;
    std::vector<double> radii;
    for (int k = 0; k < resolution; ++k) radii.push_back(u0 * std::pow(64.0, static_cast<double>(k) / (resolution - 1)));
    for (int k = 1; k < 8; ++k) radii.push_back(u0 * (1.0 + k / 8.0));
    std::sort(radii.begin(), radii.end());
    std::vector<std::pair<double, double>> nodes;
    for (double sg : {1.0, -1.0})
        for (double r : radii)
            for (int m = -32; m <= 32; ++m) {
                const double slope = cone.v * m / 32.0;
                double x1 = sg * r, x2 = slope * sg * r;
                if (cone.orientation == Chart::vertical) std::swap(x1, x2);
                nodes.emplace_back(x1, x2);
            }
    return nodes;
}

inline FrameReport frame_bounds(const ShearletSpec& spec, const DeltaQuadrature& q, const SystemParams& p,
                                int resolution = 33) {
    validate_params(p);
    if (spec.declared_moments < 1)
        throw NumericalError("generator '" + spec.label + "' declares no vanishing moments; not admissible");
    FrameReport rep;
    rep.params = p;
    rep.label = spec.label;
    const auto nodes = frame_sample_nodes(p.cone, resolution);
    rep.samples.resize(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) {
        auto [x1, x2] = nodes[k];
        double y1 = x1, y2 = x2;
        if (p.cone.orientation == Chart::vertical) std::swap(y1, y2);
        const bool interior = std::abs(y2) <= 0.9 * p.cone.v * std::abs(y1);
        rep.samples[k] = {x1, x2, q(y1, y2, p.gamma, p.xi), interior};
    });
    rep.a_bound = rep.a_interior = kInf;
    rep.b_bound = rep.b_interior = 0;
    for (const auto& s : rep.samples) {
        rep.a_bound = std::min(rep.a_bound, s.delta);
        rep.b_bound = std::max(rep.b_bound, s.delta);
        if (s.interior) {
            rep.a_interior = std::min(rep.a_interior, s.delta);
            rep.b_interior = std::max(rep.b_interior, s.delta);
        }
    }
    rep.is_frame = rep.a_bound >= 1e-12;
    rep.ratio = rep.is_frame ? rep.b_bound / rep.a_bound : kInf;
    rep.ratio_interior = rep.a_interior >= 1e-12 ? rep.b_interior / rep.a_interior : kInf;
    rep.verdict = rep.is_frame ? "frame" : "not a frame at this truncation";
    return rep;
}

// --- truncation selection

struct TruncationResult {
    SystemParams params;
    int doublings = 0;
    double worst_tail = 0;        // max over probes of C - Delta, relative to C
    double worst_scale_tail = 0;  // a > gamma part alone
    double worst_shear_tail = 0;  // |s| > Xi part alone
};

inline TruncationResult select_truncation(const ShearletSpec& spec, const DeltaQuadrature& q, const FrameConstant& c,
                                          const ConeSpec& cone, double slack, int resolution = 17) {
    validate_cone(cone);
    if (!(slack > 0) || !(slack < 1)) throw ConfigError("slack must lie in (0, 1), got " + detail::fmt_double(slack));
    if (spec.declared_moments < 2)
        throw NumericalError("select_truncation needs more than one vanishing moment; '" + spec.label + "' declares " +
                             std::to_string(spec.declared_moments));
    if (!(spec.declared_decay.tau > 0.5) || !(spec.declared_decay.mu > 0))
        throw NumericalError("select_truncation needs tau > 1/2 and mu > 0");
    const auto nodes = frame_sample_nodes(cone, resolution);
    TruncationResult res;
    res.params = {1.0, 2.0 * cone.v, cone};
    for (int it = 0; it <= 20; ++it) {
        std::vector<double> tail(nodes.size()), tail_a(nodes.size()), tail_s(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t k) {
            auto [x1, x2] = nodes[k];
            if (cone.orientation == Chart::vertical) std::swap(x1, x2);
            const double C = c.at(x1);
            tail[k] = (C - q(x1, x2, res.params.gamma, res.params.xi)) / C;
            tail_a[k] = (C - q(x1, x2, res.params.gamma, kInf)) / C;
            tail_s[k] = (C - q(x1, x2, kInf, res.params.xi)) / C;
        });
        res.worst_tail = *std::max_element(tail.begin(), tail.end());
        res.worst_scale_tail = *std::max_element(tail_a.begin(), tail_a.end());
        res.worst_shear_tail = *std::max_element(tail_s.begin(), tail_s.end());
        res.doublings = it;
        if (res.worst_tail < slack) return res;
        res.params.gamma *= 2;
        res.params.xi *= 2;
    }
    throw NumericalError("select_truncation did not converge within 20 doublings (worst relative tail " +
                         detail::fmt_double(res.worst_tail) + ")");
}

// --- windows

struct WindowSpec {
    GridMeta meta;                 // frequency node (k1, k2) of this grid
    std::vector<double> w_hat_sq;  // |W_hat|^2 per node
    std::string provenance;        // "tight" or "bounds-box"
    std::string label;
    SystemParams params;
    double max_clamp = 0;
};

inline WindowSpec synthesize_tight_window(const ShearletSpec& spec, const DeltaQuadrature& q, const FrameConstant& c,
                                          const SystemParams& p, const GridMeta& g) {
    validate_params(p);
    if (!(p.xi > p.cone.v))
        throw NumericalError("tight window needs Xi > v (Xi=" + detail::fmt_double(p.xi) +
                             ", v=" + detail::fmt_double(p.cone.v) + ")");
    const int M = spec.declared_moments;
    if (M < 1 || !(spec.declared_decay.L2 > M))
        throw NumericalError("tight window needs M > 1/2 and an L2 decay order above M");
    WindowSpec w;
    w.meta = g;
    w.provenance = "tight";
    w.label = spec.label;
    w.params = p;
    const auto delta = compute_delta(q, p, g);
    w.w_hat_sq.assign(g.size(), 0.0);
    double worst = 0;
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) {
            const std::size_t k = static_cast<std::size_t>(k1) * g.n2 + k2;
            double x1 = g.xi1(k1), x2 = g.xi2(k2);
            if (!in_cone(p.cone, x1, x2)) continue;
            if (p.cone.orientation == Chart::vertical) std::swap(x1, x2);
            const double raw = c.at(x1) - delta[k];
            if (raw < 0) worst = std::max(worst, -raw);
            w.w_hat_sq[k] = std::max(0.0, raw);
        }
    w.max_clamp = worst;
    if (worst > 1e-3 * c.max())
        throw NumericalError("tight window clamp " + detail::fmt_double(worst) +
                             " exceeds 1e-3 C_psi; Delta quadrature inconsistent");
    return w;
}

// |W_hat|^2 = C e^{-pi |xi|^2}: a smooth low-pass window for the full-plane system.
inline WindowSpec gaussian_window(double C, const GridMeta& g) {
    WindowSpec w;
    w.meta = g;
    w.provenance = "bounds-box";
    w.w_hat_sq.resize(g.size());
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) {
            const double x1 = g.xi1(k1), x2 = g.xi2(k2);
            w.w_hat_sq[static_cast<std::size_t>(k1) * g.n2 + k2] = C * std::exp(-std::numbers::pi * (x1 * x1 + x2 * x2));
        }
    return w;
}

inline WindowSpec zero_window(const GridMeta& g) {
    WindowSpec w;
    w.meta = g;
    w.provenance = "bounds-box";
    w.w_hat_sq.assign(g.size(), 0.0);
    return w;
}

inline void check_window_grid(const WindowSpec& w, const GridMeta& g) {
    if (w.meta.n1 != g.n1 || w.meta.n2 != g.n2 || w.meta.spacing != g.spacing)
        throw ConfigError("window grid does not match the field grid");
}

// --- reconstruction

// f_rec_hat = (|W|^2 + Delta) f_cone_hat / C, with Delta from the quadrature.
inline SampledField2D reconstruct_cone(const SampledField2D& f, const DeltaQuadrature& q, const FrameConstant& c,
                                       const SystemParams& p, const WindowSpec& w) {
    check_window_grid(w, f.meta);
    const SampledField2D fc = cone_project(f, p.cone);
    const auto delta = compute_delta(q, p, f.meta);
    Spectrum2D F = dft_forward(fc);
    const auto& g = F.meta;
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) {
            const std::size_t k = static_cast<std::size_t>(k1) * g.n2 + k2;
            double x1 = g.xi1(k1), x2 = g.xi2(k2);
            if (p.cone.orientation == Chart::vertical) std::swap(x1, x2);
            const double C = c.at(x1);
            F.values[k] *= C > 0 ? (w.w_hat_sq[k] + delta[k]) / C : 0.0;
        }
    SampledField2D out = dft_inverse(F, !f.is_complex);
    out.is_complex = f.is_complex;
    return out;
}

// Same reconstruction with the shearlet branch synthesised from actual
// coefficient planes on a discrete (a, s) grid: every plane is analysed,
// re-synthesised with psi_ast and accumulated with the quadrature weights.
inline SampledField2D reconstruct_cone_discrete(const SampledField2D& f, const ShearletSpec& spec, const FrameConstant& c,
                                                const SystemParams& p, const WindowSpec& w,
                                                const std::vector<double>& a_grid, const std::vector<double>& s_grid) {
    check_window_grid(w, f.meta);
    validate_grids(a_grid, s_grid);
    const SampledField2D fc = cone_project(f, p.cone);
    const Spectrum2D F = dft_forward(fc);
    const auto& g = F.meta;
    const Chart chart = p.cone.orientation;
    const auto wa = scale_weights(a_grid), ws = shear_weights(s_grid);
    // One accumulator per scale keeps the summation order fixed.
    std::vector<std::vector<cplx>> acc(a_grid.size(), std::vector<cplx>(g.size(), 0.0));
    parallel_for(a_grid.size(), [&](std::size_t i) {
        const double a = a_grid[i], a34 = std::pow(a, 0.75), sa = std::sqrt(a);
        for (std::size_t j = 0; j < s_grid.size(); ++j) {
            Spectrum2D M(g);
            std::vector<cplx> mult(g.size(), 0.0);
            for (int k1 = 0; k1 < g.n1; ++k1)
                for (int k2 = 0; k2 < g.n2; ++k2) {
                    const std::size_t k = static_cast<std::size_t>(k1) * g.n2 + k2;
                    if (F.values[k] == cplx(0.0)) continue;
                    double x1 = g.xi1(k1), x2 = g.xi2(k2);
                    if (chart == Chart::vertical) std::swap(x1, x2);
                    mult[k] = a34 * spec(a * x1, sa * (x2 - s_grid[j] * x1));
                    M.values[k] = F.values[k] * std::conj(mult[k]);
                }
            const SampledField2D plane = dft_inverse(M);  // SH(a, s, .)
            const Spectrum2D P = dft_forward(plane);
            const double wt = wa[i] * ws[j] / (a * a * a);
            for (std::size_t k = 0; k < g.size(); ++k) acc[i][k] += wt * P.values[k] * mult[k];
        }
    });
    Spectrum2D R(g);
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) {
            const std::size_t k = static_cast<std::size_t>(k1) * g.n2 + k2;
            cplx shear_branch = 0;
            for (std::size_t i = 0; i < a_grid.size(); ++i) shear_branch += acc[i][k];
            double x1 = g.xi1(k1);
            if (chart == Chart::vertical) x1 = g.xi2(k2);
            const double C = c.at(x1);
            R.values[k] = C > 0 ? (w.w_hat_sq[k] * F.values[k] + shear_branch) / C : 0.0;
        }
    SampledField2D out = dft_inverse(R, !f.is_complex);
    out.is_complex = f.is_complex;
    return out;
}

struct FullReconstruction {
    SampledField2D field;
    double omega_min = 0, omega_max = 0;
};

// Omega = Delta_{0,inf}(psi) + Delta_{0,inf}(psi_nu) + |W|^2; f_rec_hat = Omega^{-1}(...) f_hat.
inline FullReconstruction reconstruct_full(const SampledField2D& f, const DeltaQuadrature& q, const WindowSpec& w) {
    check_window_grid(w, f.meta);
    const auto& g = f.meta;
    const auto dh = compute_delta_full(q, g, false);
    const auto dv = compute_delta_full(q, g, true);
    FullReconstruction out;
    out.omega_min = kInf;
    std::vector<std::string> bad;
    std::vector<double> omega(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        omega[k] = dh[k] + dv[k] + w.w_hat_sq[k];
        out.omega_min = std::min(out.omega_min, omega[k]);
        out.omega_max = std::max(out.omega_max, omega[k]);
        if (omega[k] < 1e-12 && bad.size() < 8) {
            const int k1 = static_cast<int>(k / g.n2), k2 = static_cast<int>(k % g.n2);
            bad.push_back("(" + detail::fmt_double(g.xi1(k1)) + "," + detail::fmt_double(g.xi2(k2)) + ")");
        }
    }
    if (!bad.empty()) {
        std::string list;
        for (const auto& b : bad) list += (list.empty() ? "" : " ") + b;
        throw NumericalError("singular multiplier: Omega < 1e-12 at xi = " + list);
    }
    Spectrum2D F = dft_forward(f);
    for (std::size_t k = 0; k < g.size(); ++k) F.values[k] *= (dh[k] + dv[k] + w.w_hat_sq[k]) / omega[k];
    out.field = dft_inverse(F, !f.is_complex);
    out.field.is_complex = f.is_complex;
    return out;
}

// --- serialization

inline nlohmann::json to_json(const ConeSpec& c) {
    return {{"u", c.u}, {"v", c.v}, {"orientation", chart_name(c.orientation)}};
}

inline nlohmann::json to_json(const SystemParams& p) {
    return {{"gamma", p.gamma}, {"xi", p.xi}, {"cone", to_json(p.cone)}};
}

inline SystemParams params_from_json(const nlohmann::json& j) {
    try {
        SystemParams p;
        p.gamma = j.at("gamma").get<double>();
        p.xi = j.at("xi").get<double>();
        const auto& c = j.at("cone");
        p.cone.u = c.at("u").get<double>();
        p.cone.v = c.at("v").get<double>();
        p.cone.orientation = parse_chart(c.value("orientation", std::string("horizontal")));
        validate_params(p);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed system params: ") + e.what());
    }
}

inline nlohmann::json to_json(const FrameReport& r) {
    auto num = [](double v) { return detail::number_or_inf(v); };
    return {{"label", r.label},
            {"params", to_json(r.params)},
            {"samples", r.samples.size()},
            {"a_bound", r.a_bound},
            {"b_bound", r.b_bound},
            {"ratio", num(r.ratio)},
            {"interior", {{"max_abs_slope", 0.9 * r.params.cone.v},
                          {"a_bound", r.a_interior},
                          {"b_bound", r.b_interior},
                          {"ratio", num(r.ratio_interior)}}},
            {"is_frame", r.is_frame},
            {"verdict", r.verdict}};
}

inline nlohmann::json to_json(const TruncationResult& t) {
    nlohmann::json j = to_json(t.params);
    j["doublings"] = t.doublings;
    j["worst_relative_tail"] = t.worst_tail;
    j["worst_relative_scale_tail"] = t.worst_scale_tail;
    j["worst_relative_shear_tail"] = t.worst_shear_tail;
    return j;
}

// JSON descriptor plus an SF2D payload (f64 values of |W_hat|^2 per frequency node).
inline void save_window(const std::string& json_path, const WindowSpec& w) {
    std::string payload = json_path;
    if (auto dot = payload.rfind(".json"); dot != std::string::npos && dot + 5 == payload.size()) payload.resize(dot);
    payload += ".sf2d";
    SampledField2D f(w.meta, false);
    for (std::size_t k = 0; k < w.w_hat_sq.size(); ++k) f.values[k] = w.w_hat_sq[k];
    save_sf2d(payload, f);
    std::string base = payload.substr(payload.find_last_of('/') == std::string::npos ? 0 : payload.find_last_of('/') + 1);
    nlohmann::json j{{"provenance", w.provenance}, {"label", w.label},         {"params", to_json(w.params)},
                     {"max_clamp", w.max_clamp},   {"layout", "centered frequency nodes of the payload grid"},
                     {"payload", base}};
    std::ofstream os(json_path);
    if (!os) throw IoError("cannot open '" + json_path + "' for writing");
    os << j.dump(2) << '\n';
}

inline WindowSpec load_window(const std::string& json_path) {
    std::ifstream is(json_path);
    if (!is) throw IoError("cannot open '" + json_path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed window JSON: ") + e.what());
    }
    WindowSpec w;
    try {
        w.provenance = j.at("provenance").get<std::string>();
        w.label = j.value("label", std::string());
        w.max_clamp = j.value("max_clamp", 0.0);
        if (j.contains("params")) w.params = params_from_json(j.at("params"));
        std::string payload = j.at("payload").get<std::string>();
        const auto slash = json_path.find_last_of('/');
        if (!payload.empty() && payload[0] != '/' && slash != std::string::npos)
            payload = json_path.substr(0, slash + 1) + payload;
        const auto f = load_sf2d(payload);
        w.meta = f.meta;
        w.w_hat_sq.resize(f.values.size());
        for (std::size_t k = 0; k < f.values.size(); ++k) w.w_hat_sq[k] = f.values[k].real();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed window JSON: ") + e.what());
    }
    return w;
}

}  // namespace shearscope
