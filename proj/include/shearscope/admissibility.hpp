#pragma once

// Admissibility constant, anisotropic moment integrals and Fourier decay fits.

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "generators.hpp"
#include "parallel.hpp"

namespace shearscope {

struct MomentIntegral {
    bool divergent = false;
    double value = 0;      // fine-grid value (full plane)
    double error = 0;      // |fine - coarse|
    double positive = 0;   // omega1 > 0 half
    double negative = 0;   // omega1 < 0 half
};

struct QuadratureLevel {
    double cutoff;       // smallest |omega1|
    int per_octave;      // geometric nodes per octave in |omega1|
    int omega2_per_unit; // uniform nodes per unit length in omega2
};

namespace detail {

// Integrals of |psi_hat|^2 / |omega1|^{2k}, k = 1..kmax, over cutoff < |omega1| < R,
// |omega2| < R, split by the sign of omega1. Trapezoid in log|omega1| and in omega2.
inline std::vector<std::pair<double, double>> weighted_energies(const ShearletSpec& spec, int kmax,
                                                                const QuadratureLevel& q) {
    const double R = spec.support_radius;
    const int octaves = static_cast<int>(std::ceil(std::log2(R / q.cutoff)));
    const int n1 = octaves * q.per_octave + 1;
    const double dl = std::log(R / q.cutoff) / (n1 - 1);
    const int n2 = 2 * static_cast<int>(std::ceil(R * q.omega2_per_unit)) + 1;
    const double d2 = 2 * R / (n2 - 1);
    std::vector<double> line_pos(n1), line_neg(n1), w1s(n1);
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t i) {
        const double w1 = q.cutoff * std::exp(dl * static_cast<double>(i));
        double sp = 0, sn = 0;
        for (int j = 0; j < n2; ++j) {
            const double w2 = -R + j * d2;
            const double wt = (j == 0 || j == n2 - 1) ? 0.5 : 1.0;
            sp += wt * std::norm(spec(w1, w2));
            sn += wt * std::norm(spec(-w1, w2));
        }
        w1s[i] = w1;
        line_pos[i] = sp * d2;
        line_neg[i] = sn * d2;
    });
    std::vector<std::pair<double, double>> out;
    for (int k = 1; k <= kmax; ++k) {
        double P = 0, N = 0;
        for (int i = 0; i < n1; ++i) {
            // d omega1 = omega1 d log(omega1)
            const double wt = ((i == 0 || i == n1 - 1) ? 0.5 : 1.0) * std::pow(w1s[i], 1.0 - 2.0 * k);
            P += wt * line_pos[i];
            N += wt * line_neg[i];
        }
        out.emplace_back(P * dl, N * dl);
    }
    return out;
}

inline constexpr QuadratureLevel kCoarse{0x1p-20, 128, 64};
inline constexpr QuadratureLevel kFine{0x1p-24, 256, 128};

}  // namespace detail

// Quadrature of the integrals of |psi_hat|^2 / |omega1|^{2k} for k = 1..kmax.
// Divergent when the refined value exceeds ten times the coarse one.
inline std::vector<MomentIntegral> moment_integrals(const ShearletSpec& spec, int kmax) {
    if (kmax < 1) throw ConfigError("moment order must be >= 1");
    auto coarse = detail::weighted_energies(spec, kmax, detail::kCoarse);
    auto fine = detail::weighted_energies(spec, kmax, detail::kFine);
    std::vector<MomentIntegral> out;
    for (int k = 0; k < kmax; ++k) {
        MomentIntegral m;
        const double c = coarse[k].first + coarse[k].second;
        const double f = fine[k].first + fine[k].second;
        m.value = f;
        m.positive = fine[k].first;
        m.negative = fine[k].second;
        m.error = std::abs(f - c);
        m.divergent = !std::isfinite(f) || (c > 0 && f > 10 * c) || (c == 0 && f > 0);
        out.push_back(m);
    }
    return out;
}

inline MomentIntegral moment_integral(const ShearletSpec& spec, int k) {
    if (k < 1) throw ConfigError("moment order must be >= 1");
    return moment_integrals(spec, k).back();
}

struct AdmissibilityConstant {
    bool admissible = false;
    double c_psi = 0;          // full-plane integral
    double c_psi_error = 0;
    double c_plus = 0;         // omega1 > 0 half-plane
    double c_minus = 0;        // omega1 < 0 half-plane
};

inline AdmissibilityConstant from_moment(const MomentIntegral& m) {
    AdmissibilityConstant c;
    c.admissible = !m.divergent && m.value > 0;
    c.c_psi = m.value;
    c.c_psi_error = m.error;
    c.c_plus = m.positive;
    c.c_minus = m.negative;
    return c;
}

inline AdmissibilityConstant admissibility_constant(const ShearletSpec& spec) {
    return from_moment(moment_integral(spec, 1));
}

// Constant of the a > 0 group integral at frequency xi: the half-plane
// integral on the side sgn(omega1) = sgn(xi1). This is what the Calderon
// energy, the frame multiplier limit and the tight window converge to.
struct FrameConstant {
    double positive = 0;
    double negative = 0;
    double at(double xi1) const { return xi1 > 0 ? positive : (xi1 < 0 ? negative : 0.0); }
    double max() const { return std::max(positive, negative); }
};

inline FrameConstant frame_constant(const ShearletSpec& spec) {
    auto c = admissibility_constant(spec);
    if (!c.admissible) throw NumericalError("generator '" + spec.label + "' is not admissible");
    return {c.c_plus, c.c_minus};
}

// --- decay fits

struct RayFit {
    std::string ray;        // e.g. "xi1 @ xi2=0.5"
    bool skipped = false;   // identically zero along the ray
    bool infinite = false;  // underflow or slope steeper than -20
    double slope = 0;
    std::string note;
};

struct DecayFit {
    double order = 0;  // -worst slope, or inf
    bool infinite = false;
    std::vector<RayFit> rays;
};

struct DecayFits {
    DecayFit psi_xi1;    // L1, mu
    DecayFit psi_xi2;    // L, tau
    DecayFit theta_xi2;  // L2
    double window_lo = 8, window_hi = 64;
};

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

// eval(r) evaluates the magnitude along the ray at radius r > 0.
template <class Eval>
RayFit fit_ray(const std::string& name, Eval&& eval, double lo, double hi) {
    RayFit fit;
    fit.ray = name;
    // Zero everywhere (probe the whole ray, not only the fit window)?
    bool any = false;
    for (int k = 0; k <= 400 && !any; ++k) {
        const double r = 1.0 / 64 * std::pow(hi * 64, k / 400.0);
        if (eval(r) > 0) any = true;
    }
    if (!any) {
        fit.skipped = true;
        fit.note = "generator vanishes identically along the ray";
        return fit;
    }
    const int n = 33;
    std::vector<double> x, y;
    for (int k = 0; k < n; ++k) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
        const double v = eval(r);
        if (!(v > std::numeric_limits<double>::min())) {
            fit.infinite = true;
            fit.note = "magnitude underflows inside the fit window";
            return fit;
        }
        x.push_back(std::log(r));
        y.push_back(std::log(v));
    }
    fit.slope = ls_slope(x, y);
    if (fit.slope < -20) {
        fit.infinite = true;
        fit.note = "slope steeper than -20";
    }
    return fit;
}

inline DecayFit combine(std::vector<RayFit> rays) {
    DecayFit out;
    out.rays = std::move(rays);
    bool any_finite = false;
    double worst = -kInf;
    for (const auto& r : out.rays)
        if (!r.skipped && !r.infinite) {
            any_finite = true;
            worst = std::max(worst, r.slope);
        }
    out.infinite = !any_finite;
    out.order = any_finite ? -worst : kInf;
    return out;
}

}  // namespace detail

inline DecayFits estimate_decay_orders(const ShearletSpec& spec, double lo = 8, double hi = 64) {
    DecayFits fits;
    fits.window_lo = lo;
    fits.window_hi = hi;
    auto label = [](const char* axis, const char* other, double v) {
        return std::string(axis) + " @ " + other + "=" + detail::fmt_double(v);
    };
    std::vector<RayFit> r1, r2, r3;
    for (double c : {0.0, 0.5, 1.0})
        r1.push_back(detail::fit_ray(label("xi1", "xi2", c), [&](double r) { return std::abs(spec(r, c)); }, lo, hi));
    const int M = spec.infinite_moments() ? 0 : spec.declared_moments;
    for (double c : {0.5, 1.0, 2.0}) {
        r2.push_back(detail::fit_ray(label("xi2", "xi1", c), [&](double r) { return std::abs(spec(c, r)); }, lo, hi));
        // theta_hat = psi_hat / xi1^M; along an xi2-ray the divisor is constant.
        r3.push_back(detail::fit_ray(label("xi2", "xi1", c),
                                     [&](double r) { return std::abs(spec(c, r)) / std::pow(c, M); }, lo, hi));
    }
    fits.psi_xi1 = detail::combine(std::move(r1));
    fits.psi_xi2 = detail::combine(std::move(r2));
    fits.theta_xi2 = detail::combine(std::move(r3));
    return fits;
}

// --- JSON report

namespace detail {

inline nlohmann::json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline nlohmann::json fit_json(const DecayFit& f) {
    nlohmann::json rays = nlohmann::json::array();
    for (const auto& r : f.rays) {
        nlohmann::json j{{"ray", r.ray}, {"skipped", r.skipped}, {"infinite", r.infinite}};
        if (!r.skipped && !r.infinite) j["slope"] = r.slope;
        if (!r.note.empty()) j["note"] = r.note;
        rays.push_back(j);
    }
    return {{"order", number_or_inf(f.order)}, {"rays", rays}};
}

}  // namespace detail

struct AdmissibilityReport {
    std::string label;
    AdmissibilityConstant constant;
    std::map<int, MomentIntegral> moments;
    DecayFits decay;
};

inline AdmissibilityReport analyze_generator(const ShearletSpec& spec, int max_moment = 4) {
    AdmissibilityReport rep;
    rep.label = spec.label;
    auto all = moment_integrals(spec, max_moment);
    for (int k = 1; k <= max_moment; ++k) rep.moments[k] = all[k - 1];
    rep.constant = from_moment(all[0]);
    rep.decay = estimate_decay_orders(spec);
    return rep;
}

inline nlohmann::json to_json(const AdmissibilityReport& r) {
    using nlohmann::json;
    json moments = json::object();
    for (const auto& [k, m] : r.moments) moments[std::to_string(k)] = m.divergent ? json("divergent") : json(m.value);
    const auto& d = r.decay;
    return {
        {"label", r.label},
        {"admissible", r.constant.admissible},
        {"c_psi", r.constant.c_psi},
        {"c_psi_error", r.constant.c_psi_error},
        {"c_psi_group", {{"positive", r.constant.c_plus}, {"negative", r.constant.c_minus}}},
        {"moments", moments},
        {"decay_fits",
         {{"window", {d.window_lo, d.window_hi}},
          {"psi_xi1", detail::fit_json(d.psi_xi1)},
          {"psi_xi2", detail::fit_json(d.psi_xi2)},
          {"theta_xi2", detail::fit_json(d.theta_xi2)},
          {"L1", detail::number_or_inf(d.psi_xi1.order)},
          {"mu", detail::number_or_inf(d.psi_xi1.order)},
          {"L", detail::number_or_inf(d.psi_xi2.order)},
          {"tau", detail::number_or_inf(d.psi_xi2.order)},
          {"L2", detail::number_or_inf(d.theta_xi2.order)}}},
    };
}

}  // namespace shearscope
