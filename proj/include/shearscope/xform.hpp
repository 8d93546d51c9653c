#pragma once

// Continuous shearlet transform on (a, s, t) grids via Fourier multipliers.
//
// Horizontal chart: SH(a,s,t) = <f, psi_ast>, multiplier a^{3/4} conj(psi_hat(a xi1, sqrt(a)(xi2 - s xi1))).
// Vertical chart (the nu system): dilation and shear act on swapped axes,
// multiplier a^{3/4} conj(psi_hat(a xi2, sqrt(a)(xi1 - s xi2))). This equals the
// horizontal transform of the axis-swapped field with t swapped.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace shearscope {

enum class Chart { horizontal, vertical };

inline const char* chart_name(Chart c) { return c == Chart::horizontal ? "horizontal" : "vertical"; }

inline Chart parse_chart(const std::string& s) {
    if (s == "horizontal") return Chart::horizontal;
    if (s == "vertical") return Chart::vertical;
    throw ConfigError("chart must be 'horizontal' or 'vertical', got '" + s + "'");
}

struct ConeSpec {
    double u = 1.0;
    double v = 1.0;
    Chart orientation = Chart::horizontal;
};

inline void validate_cone(const ConeSpec& c) {
    if (!(c.u >= 0) || !std::isfinite(c.u)) throw ConfigError("cone u must be >= 0");
    if (!(c.v > 0)) throw ConfigError("cone v must be > 0");
}

// Sharp memberships. The closed low-pass square [-1,1]^2 wins its boundary,
// the horizontal cone wins the diagonal |xi2| = v|xi1|.
inline bool in_lowpass(double xi1, double xi2) { return std::abs(xi1) <= 1 && std::abs(xi2) <= 1; }

inline bool in_horizontal_cone(double xi1, double xi2, double u, double v) {
    const double a1 = std::abs(xi1), a2 = std::abs(xi2);
    if (a1 < u || a2 > v * a1) return false;
    if (u > 0 && a1 <= u && a2 <= u) return false;
    return a1 > 0;
}

inline bool in_cone(const ConeSpec& c, double xi1, double xi2) {
    if (c.orientation == Chart::horizontal) return in_horizontal_cone(xi1, xi2, c.u, c.v);
    return in_horizontal_cone(xi2, xi1, c.u, c.v) && !in_horizontal_cone(xi1, xi2, c.u, c.v);
}

inline SampledField2D cone_project(const SampledField2D& f, const ConeSpec& cone) {
    validate_cone(cone);
    return apply_multiplier(f, [&](double x1, double x2) { return in_cone(cone, x1, x2) ? 1.0 : 0.0; });
}

inline SampledField2D lowpass_project(const SampledField2D& f) {
    return apply_multiplier(f, [](double x1, double x2) { return in_lowpass(x1, x2) ? 1.0 : 0.0; });
}

// --- grids

// Log-spaced scales from a_min to a_max inclusive, `per_octave` per doubling.
inline std::vector<double> make_scale_grid(double a_min, double a_max, int per_octave) {
    if (!(a_min > 0) || !(a_max >= a_min)) throw ConfigError("scale grid needs 0 < a_min <= a_max");
    if (per_octave < 1) throw ConfigError("scale grid needs per_octave >= 1");
    const int steps = std::max(1, static_cast<int>(std::lround(std::log2(a_max / a_min) * per_octave)));
    std::vector<double> a(steps + 1);
    for (int i = 0; i <= steps; ++i) a[i] = a_min * std::pow(a_max / a_min, static_cast<double>(i) / steps);
    a.back() = a_max;
    return a;
}

// Uniform shears on [-xi, xi] with the given step (xi rounded to a multiple of step).
inline std::vector<double> make_shear_grid(double xi, double step) {
    if (!(xi > 0) || !(step > 0)) throw ConfigError("shear grid needs xi > 0 and step > 0");
    const int m = static_cast<int>(std::lround(xi / step));
    std::vector<double> s;
    for (int j = -m; j <= m; ++j) s.push_back(j * step);
    return s;
}

struct DefaultGrids {
    std::vector<double> a, s;
};

// 8 scales per octave from 4 h^2 to gamma; shears step 1/8 on [-xi, xi].
inline DefaultGrids default_grids(const GridMeta& g, double gamma = 1.0, double xi = 2.0) {
    return {make_scale_grid(std::min(4 * g.spacing * g.spacing, gamma), gamma, 8), make_shear_grid(xi, 0.125)};
}

// Trapezoid weights of a (possibly non-uniform) grid in log a: da = a dlog a.
inline std::vector<double> scale_weights(const std::vector<double>& a) {
    std::vector<double> w(a.size(), 0.0);
    if (a.size() < 2) return w;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const double dl = std::log(a[i + 1] / a[i]);
        w[i] += 0.5 * dl * a[i];
        w[i + 1] += 0.5 * dl * a[i + 1];
    }
    return w;
}

inline std::vector<double> shear_weights(const std::vector<double>& s) {
    std::vector<double> w(s.size(), 0.0);
    if (s.size() < 2) return w;
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
        const double ds = s[j + 1] - s[j];
        w[j] += 0.5 * ds;
        w[j + 1] += 0.5 * ds;
    }
    return w;
}

inline void validate_grids(const std::vector<double>& a, const std::vector<double>& s) {
    if (a.empty() || s.empty()) throw ConfigError("scale and shear grids must be non-empty");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0) || !std::isfinite(a[i])) throw ConfigError("scales must be positive and finite");
        if (i && !(a[i] > a[i - 1])) throw ConfigError("scales must be strictly increasing");
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!std::isfinite(s[j])) throw ConfigError("shears must be finite");
        if (std::abs(s[j] + s[s.size() - 1 - j]) > 1e-12 * (1 + std::abs(s[j])))
            throw ConfigError("shear grid must be symmetric about 0");
    }
}

// --- multipliers

inline cplx shearlet_multiplier(const ShearletSpec& spec, Chart chart, double a, double s, double xi1, double xi2) {
    if (chart == Chart::vertical) std::swap(xi1, xi2);
    return std::pow(a, 0.75) * std::conj(spec(a * xi1, std::sqrt(a) * (xi2 - s * xi1)));
}

// Warnings for scales whose sqrt(a) is below two grid spacings.
inline std::vector<std::string> resolution_warnings(const GridMeta& g, const std::vector<double>& a) {
    std::vector<std::string> out;
    for (double ai : a)
        if (std::sqrt(ai) < 2 * g.spacing) {
            out.push_back("scale a=" + detail::fmt_double(ai) + " has sqrt(a) < 2*spacing; generator under-resolved");
        }
    return out;
}

// Computes every (a, s) coefficient plane and hands it to
// callback(i, j, plane). Planes are produced concurrently; the callback must
// only touch state owned by (i, j).
template <class Callback>
void for_each_plane(const Spectrum2D& F, const ShearletSpec& spec, const std::vector<double>& a_grid,
                    const std::vector<double>& s_grid, Chart chart, Callback&& callback) {
    validate_grids(a_grid, s_grid);
    const auto& g = F.meta;
    const std::size_t ns = s_grid.size();
    parallel_for(a_grid.size() * ns, [&](std::size_t idx) {
        const std::size_t i = idx / ns, j = idx % ns;
        const double a = a_grid[i], s = s_grid[j], a34 = std::pow(a, 0.75), sa = std::sqrt(a);
        Spectrum2D M(g);
        for (int k1 = 0; k1 < g.n1; ++k1)
            for (int k2 = 0; k2 < g.n2; ++k2) {
                const cplx v = F.at(k1, k2);
                if (v == cplx(0.0)) continue;
                double x1 = g.xi1(k1), x2 = g.xi2(k2);
                if (chart == Chart::vertical) std::swap(x1, x2);
                M.at(k1, k2) = v * a34 * std::conj(spec(a * x1, sa * (x2 - s * x1)));
            }
        SampledField2D plane = dft_inverse(M);
        callback(i, j, plane);
    });
}

struct CoeffVolume {
    std::vector<double> a_grid, s_grid;
    Chart chart = Chart::horizontal;
    GridMeta field_meta;
    std::string label;
    std::vector<cplx> coeffs;  // (i, j, t row-major)
    std::vector<std::string> warnings;

    std::size_t plane_size() const { return field_meta.size(); }
    std::size_t offset(std::size_t i, std::size_t j) const { return (i * s_grid.size() + j) * plane_size(); }
    const cplx* plane(std::size_t i, std::size_t j) const { return coeffs.data() + offset(i, j); }
    cplx at(std::size_t i, std::size_t j, int t1, int t2) const {
        return coeffs[offset(i, j) + static_cast<std::size_t>(t1) * field_meta.n2 + t2];
    }
};

inline CoeffVolume shearlet_transform(const SampledField2D& f, const ShearletSpec& spec, const std::vector<double>& a_grid,
                                      const std::vector<double>& s_grid, Chart chart = Chart::horizontal) {
    validate_grids(a_grid, s_grid);
    CoeffVolume vol;
    vol.a_grid = a_grid;
    vol.s_grid = s_grid;
    vol.chart = chart;
    vol.field_meta = f.meta;
    vol.label = spec.label;
    vol.warnings = resolution_warnings(f.meta, a_grid);
    vol.coeffs.assign(a_grid.size() * s_grid.size() * f.meta.size(), 0.0);
    const Spectrum2D F = dft_forward(f);
    for_each_plane(F, spec, a_grid, s_grid, chart, [&](std::size_t i, std::size_t j, const SampledField2D& p) {
        std::copy(p.values.begin(), p.values.end(), vol.coeffs.begin() + static_cast<std::ptrdiff_t>(vol.offset(i, j)));
    });
    return vol;
}

inline CoeffVolume dual_cone_transform(const SampledField2D& f, const ShearletSpec& spec, const std::vector<double>& a_grid,
                                       const std::vector<double>& s_grid) {
    return shearlet_transform(f, spec, a_grid, s_grid, Chart::vertical);
}

// Sum over (a, s, t) of |SH|^2 a^{-3} da ds dt with trapezoid weights in log a
// and s and the cell area in t; planes are streamed, never stored.
inline double coefficient_energy(const SampledField2D& f, const ShearletSpec& spec, const std::vector<double>& a_grid,
                                 const std::vector<double>& s_grid, Chart chart = Chart::horizontal) {
    const auto wa = scale_weights(a_grid), ws = shear_weights(s_grid);
    std::vector<double> per_plane(a_grid.size() * s_grid.size(), 0.0);
    const Spectrum2D F = dft_forward(f);
    for_each_plane(F, spec, a_grid, s_grid, chart, [&](std::size_t i, std::size_t j, const SampledField2D& p) {
        double e = 0;
        for (const auto& v : p.values) e += std::norm(v);
        per_plane[i * s_grid.size() + j] = e * p.meta.cell() * wa[i] * ws[j] / (a_grid[i] * a_grid[i] * a_grid[i]);
    });
    double total = 0;
    for (double e : per_plane) total += e;
    return total;
}

// --- CV1: "CV1\n" + one-line JSON header + "\n" + little-endian c128 payload.

inline void write_cv1(std::ostream& os, const CoeffVolume& v) {
    const auto& g = v.field_meta;
    nlohmann::json h{{"format", "CV1"},
                     {"label", v.label},
                     {"chart", chart_name(v.chart)},
                     {"a_grid", v.a_grid},
                     {"s_grid", v.s_grid},
                     {"field_meta",
                      {{"n1", g.n1}, {"n2", g.n2}, {"spacing", g.spacing}, {"origin1", g.origin1}, {"origin2", g.origin2}}},
                     {"index_order", "scale, shear, t1, t2"},
                     {"dtype", "c128"}};
    os << "CV1\n" << h.dump() << '\n';
    detail::write_le_doubles(os, reinterpret_cast<const double*>(v.coeffs.data()), 2 * v.coeffs.size());
}

inline CoeffVolume read_cv1(std::istream& is) {
    std::string magic, header;
    if (!std::getline(is, magic) || magic != "CV1") throw IoError("missing CV1 magic line");
    if (!std::getline(is, header)) throw IoError("missing CV1 header");
    CoeffVolume v;
    try {
        auto h = nlohmann::json::parse(header);
        v.label = h.at("label").get<std::string>();
        v.chart = parse_chart(h.at("chart").get<std::string>());
        v.a_grid = h.at("a_grid").get<std::vector<double>>();
        v.s_grid = h.at("s_grid").get<std::vector<double>>();
        const auto& m = h.at("field_meta");
        v.field_meta = {m.at("n1").get<int>(), m.at("n2").get<int>(), m.at("spacing").get<double>(),
                        m.at("origin1").get<double>(), m.at("origin2").get<double>()};
        validate_meta(v.field_meta);
        validate_grids(v.a_grid, v.s_grid);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed CV1 header: ") + e.what());
    } catch (const ConfigError& e) {
        throw IoError(std::string("invalid CV1 header: ") + e.what());
    }
    v.coeffs.resize(v.a_grid.size() * v.s_grid.size() * v.field_meta.size());
    detail::read_le_doubles(is, reinterpret_cast<double*>(v.coeffs.data()), 2 * v.coeffs.size());
    if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after CV1 payload");
    return v;
}

inline void save_cv1(const std::string& path, const CoeffVolume& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_cv1(os, v);
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline CoeffVolume load_cv1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_cv1(is);
}

}  // namespace shearscope
