#pragma once

// Shear-parametrized Radon transform Rf(u, s) = integral of f(u - s x2, x2) dx2,
// the projection-slice check, profile derivatives and line-singularity fields.

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "generators.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace shearscope {

struct RadonProfile {
    std::vector<cplx> values;
    double u0 = 0, du = 1;  // u_k = u0 + k du
    double slope = 0;
    bool is_complex = false;

    std::size_t size() const { return values.size(); }
    double u(std::size_t k) const { return u0 + du * static_cast<double>(k); }
};

inline constexpr double kMaxRadonSlope = 4.0;

// Trapezoid over the x2 rows of the periodized field (exact for periodic data);
// along x1 the sheared sample point is linearly interpolated.
inline RadonProfile radon(const SampledField2D& f, double s, double u0, double du, int count,
                          double max_slope = kMaxRadonSlope) {
    validate_meta(f.meta);
    if (!(std::abs(s) <= max_slope))
        throw ConfigError("radon slope |s| must be <= " + detail::fmt_double(max_slope) + ", got " +
                          detail::fmt_double(s));
    if (count < 1 || !(du > 0)) throw ConfigError("radon u-grid must be non-empty with positive step");
    const auto& g = f.meta;
    RadonProfile out;
    out.values.assign(count, 0.0);
    out.u0 = u0;
    out.du = du;
    out.slope = s;
    out.is_complex = f.is_complex;
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t k) {
        const double u = out.u(k);
        cplx acc = 0;
        for (int j = 0; j < g.n2; ++j) {
            const double pos = (u - s * g.x2(j) - g.origin1) / g.spacing;
            const double fl = std::floor(pos);
            const double th = pos - fl;
            int i0 = static_cast<int>(std::fmod(fl, g.n1));
            if (i0 < 0) i0 += g.n1;
            const int i1 = (i0 + 1) % g.n1;
            acc += (1 - th) * f.at(i0, j) + th * f.at(i1, j);
        }
        out.values[k] = acc * g.spacing;
    });
    return out;
}

// Profile on the x1 nodes of the field.
inline RadonProfile radon(const SampledField2D& f, double s) {
    return radon(f, s, f.meta.origin1, f.meta.spacing, f.meta.n1);
}

// Continuous-scaled DFT of a profile at the centered frequencies (k - n/2)/(n du).
inline std::vector<cplx> profile_spectrum(const RadonProfile& p) {
    const int n = static_cast<int>(p.size());
    std::vector<cplx> out(n);
    for (int k = 0; k < n; ++k) out[k] = p.values[k] * ((k & 1) ? -1.0 : 1.0);
    detail::fft_inplace(out, 1, n, FFTW_FORWARD);
    for (int k = 0; k < n; ++k) {
        const double w = (k - n / 2) / (n * p.du);
        out[k] *= p.du * std::polar(1.0, -2 * std::numbers::pi * p.u0 * w);
    }
    return out;
}

inline RadonProfile profile_from_spectrum(const std::vector<cplx>& S, const RadonProfile& like) {
    const int n = static_cast<int>(S.size());
    std::vector<cplx> v(n);
    for (int k = 0; k < n; ++k) {
        const double w = (k - n / 2) / (n * like.du);
        v[k] = S[k] * std::polar(1.0, 2 * std::numbers::pi * like.u0 * w);
    }
    detail::fft_inplace(v, 1, n, FFTW_BACKWARD);
    RadonProfile out = like;
    const double dw = 1.0 / (n * like.du);
    for (int k = 0; k < n; ++k) {
        v[k] *= dw * ((k & 1) ? -1.0 : 1.0);
        if (!like.is_complex) v[k] = v[k].real();
    }
    out.values = std::move(v);
    return out;
}

struct SliceCheck {
    double slope = 0;
    double max_error = 0;      // sup |R_hat - f_hat| / sup |f_hat| over the band
    double band = 0;           // |omega| limit
    std::size_t compared = 0;  // frequencies in the band
};

// Compares the 1-D transform of radon(f, s) with f_hat(omega, s omega). The
// slice values come from the sampled field's own transform evaluated off-grid
// (FFT along x1, direct sum along x2), so the only approximation measured is
// the Radon path's interpolation.
inline SliceCheck projection_slice_check(const SampledField2D& f, double s) {
    const auto R = radon(f, s);
    const auto Rh = profile_spectrum(R);
    const auto& g = f.meta;
    const int n1 = g.n1, n2 = g.n2;
    // G(k, j) = sum_i h f(i, j) e^{-2 pi i x1_i omega_k}
    std::vector<cplx> G(static_cast<std::size_t>(n1) * n2);
    for (int j = 0; j < n2; ++j) {
        std::vector<cplx> col(n1);
        for (int i = 0; i < n1; ++i) col[i] = f.at(i, j) * ((i & 1) ? -1.0 : 1.0);
        detail::fft_inplace(col, 1, n1, FFTW_FORWARD);
        for (int k = 0; k < n1; ++k)
            G[static_cast<std::size_t>(k) * n2 + j] =
                col[k] * g.spacing * std::polar(1.0, -2 * std::numbers::pi * g.origin1 * g.xi1(k));
    }
    SliceCheck out;
    out.slope = s;
    out.band = 0.5 / (2 * g.spacing) / std::sqrt(1 + s * s);
    std::vector<cplx> F(n1);
    double peak = 0, err = 0;
    for (int k = 0; k < n1; ++k) {
        const double w = g.xi1(k);
        if (std::abs(w) > out.band) continue;
        cplx acc = 0;
        for (int j = 0; j < n2; ++j)
            acc += G[static_cast<std::size_t>(k) * n2 + j] * std::polar(1.0, -2 * std::numbers::pi * g.x2(j) * s * w);
        acc *= g.spacing;
        peak = std::max(peak, std::abs(acc));
        err = std::max(err, std::abs(acc - Rh[k]));
        ++out.compared;
    }
    out.max_error = peak > 0 ? err / peak : err;
    return out;
}

// I^(N): multiplier (2 pi i omega)^N for integer N, |2 pi omega|^N otherwise.
inline RadonProfile fractional_derivative(const RadonProfile& p, double N) {
    if (!(N >= 0)) throw ConfigError("derivative order N must be >= 0");
    if (N == 0) return p;
    auto S = profile_spectrum(p);
    const int n = static_cast<int>(S.size());
    const bool integer = std::floor(N) == N;
    for (int k = 0; k < n; ++k) {
        const double w = (k - n / 2) / (n * p.du);
        const double tw = 2 * std::numbers::pi * w;
        if (integer) {
            S[k] *= std::pow(cplx(0, tw), static_cast<int>(N));
        } else {
            S[k] *= w == 0 ? 0.0 : std::pow(std::abs(tw), N);
        }
    }
    return profile_from_spectrum(S, p);
}

inline void write_profile_csv(std::ostream& os, const RadonProfile& p) {
    os << "u,re,im\n";
    for (std::size_t k = 0; k < p.size(); ++k)
        os << detail::fmt_double(p.u(k)) << ',' << detail::fmt_double(p.values[k].real()) << ','
           << detail::fmt_double(p.values[k].imag()) << '\n';
}

inline void save_profile_csv(const std::string& path, const RadonProfile& p) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_profile_csv(os, p);
}

// --- line singularities

struct LineSingularity {
    double s0 = 0, u0 = 0;
    double width = 0;
    // Cutoff Phi: 1 within radius/2 of the centre, smooth fall-off to 0 at
    // radius. A non-positive radius means Phi = 1.
    double center1 = 0, center2 = 0, radius = 0;
};

inline double cutoff_value(const LineSingularity& ls, double x1, double x2) {
    if (!(ls.radius > 0)) return 1.0;
    const double r = std::hypot(x1 - ls.center1, x2 - ls.center2) / ls.radius;
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    return std::cos(std::numbers::pi / 2 * detail::meyer_nu(2 * r - 1));
}

struct LineField {
    SampledField2D field;
    std::vector<std::string> warnings;
};

// Phi(x) (1/width) g((x1 + s0 x2 - u0)/width), g the unit-mass Gaussian. The
// ridge coordinate is wrapped to the nearest periodic image along x1, so a
// line with integer slope on a square grid is seamless.
inline LineField make_line_singularity(const LineSingularity& ls, const GridMeta& g) {
    validate_meta(g);
    if (!(ls.width > 0)) throw ConfigError("line width must be > 0 for a rasterized field");
    LineField out;
    out.field = SampledField2D(g, false);
    if (ls.width < 2 * g.spacing)
        out.warnings.push_back("width " + detail::fmt_double(ls.width) + " < 2*spacing: ridge is aliased");
    const double L = g.n1 * g.spacing;
    const double norm = 1.0 / (ls.width * std::sqrt(2 * std::numbers::pi));
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            const double x1 = g.x1(i), x2 = g.x2(j);
            double d = x1 + ls.s0 * x2 - ls.u0;
            d -= L * std::round(d / L);
            const double z = d / ls.width;
            out.field.at(i, j) = cutoff_value(ls, x1, x2) * norm * std::exp(-0.5 * z * z);
        }
    return out;
}

}  // namespace shearscope
