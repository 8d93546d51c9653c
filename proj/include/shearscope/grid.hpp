#pragma once

// Uniform periodic grids and the continuous-scaled DFT pair.
//
// Node (i, j) sits at x = (origin1 + i*h, origin2 + j*h) and is stored at
// values[i*n2 + j]. Spectra use the centered layout: index k maps to
// xi_k = (k - n/2) / (n*h), so DC sits at (n1/2, n2/2).

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"

namespace shearscope {

using cplx = std::complex<double>;

struct GridMeta {
    int n1 = 0, n2 = 0;
    double spacing = 1.0;
    double origin1 = 0.0, origin2 = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
    double x1(int i) const { return origin1 + i * spacing; }
    double x2(int j) const { return origin2 + j * spacing; }
    double dxi1() const { return 1.0 / (n1 * spacing); }
    double dxi2() const { return 1.0 / (n2 * spacing); }
    double xi1(int k) const { return (k - n1 / 2) * dxi1(); }
    double xi2(int k) const { return (k - n2 / 2) * dxi2(); }
    double cell() const { return spacing * spacing; }
    double freq_cell() const { return dxi1() * dxi2(); }

    bool same_as(const GridMeta& o) const {
        return n1 == o.n1 && n2 == o.n2 && spacing == o.spacing && origin1 == o.origin1 &&
               origin2 == o.origin2;
    }
};

inline void validate_meta(const GridMeta& g) {
    if (g.n1 < 8 || g.n2 < 8 || g.n1 % 2 || g.n2 % 2)
        throw ConfigError("grid sizes must be even and >= 8, got " + std::to_string(g.n1) + "x" +
                          std::to_string(g.n2));
    if (!(g.spacing > 0) || !std::isfinite(g.spacing))
        throw ConfigError("grid spacing must be positive and finite");
    if (!std::isfinite(g.origin1) || !std::isfinite(g.origin2))
        throw ConfigError("grid origin must be finite");
}

struct SampledField2D {
    GridMeta meta;
    std::vector<cplx> values;
    bool is_complex = false;  // controls the SF2D dtype only

    SampledField2D() = default;
    explicit SampledField2D(const GridMeta& m, bool cplx_valued = false)
        : meta(m), values(m.size()), is_complex(cplx_valued) {}

    cplx& at(int i, int j) { return values[static_cast<std::size_t>(i) * meta.n2 + j]; }
    const cplx& at(int i, int j) const { return values[static_cast<std::size_t>(i) * meta.n2 + j]; }
};

struct Spectrum2D {
    GridMeta meta;  // of the source field
    std::vector<cplx> values;

    Spectrum2D() = default;
    explicit Spectrum2D(const GridMeta& m) : meta(m), values(m.size()) {}

    cplx& at(int k1, int k2) { return values[static_cast<std::size_t>(k1) * meta.n2 + k2]; }
    const cplx& at(int k1, int k2) const {
        return values[static_cast<std::size_t>(k1) * meta.n2 + k2];
    }
};

struct FrequencyGrid {
    std::vector<double> xi1, xi2;
};

inline FrequencyGrid make_frequency_grid(int n1, int n2, double spacing) {
    if (n1 <= 0 || n2 <= 0 || n1 % 2 || n2 % 2) throw ConfigError("frequency grid needs even sizes");
    if (!(spacing > 0)) throw ConfigError("frequency grid needs positive spacing");
    GridMeta g{n1, n2, spacing, 0.0, 0.0};
    FrequencyGrid out;
    out.xi1.resize(n1);
    out.xi2.resize(n2);
    for (int k = 0; k < n1; ++k) out.xi1[k] = g.xi1(k);
    for (int k = 0; k < n2; ++k) out.xi2[k] = g.xi2(k);
    return out;
}

namespace detail {

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// Plans are cached per (n1, n2, sign) and executed with new arrays, which
// FFTW allows concurrently once the plan exists.
inline fftw_plan fft_plan(int n1, int n2, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard lk(fftw_mutex());
    auto key = std::make_tuple(n1, n2, sign);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    std::vector<cplx> tmp(static_cast<std::size_t>(n1) * n2);
    auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
    fftw_plan plan = fftw_plan_dft_2d(n1, n2, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

inline void fft_inplace(std::vector<cplx>& data, int n1, int n2, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(fft_plan(n1, n2, sign), p, p);
}

inline double checkerboard(int i, int j) { return ((i + j) & 1) ? -1.0 : 1.0; }

}  // namespace detail

inline Spectrum2D dft_forward(const SampledField2D& f) {
    validate_meta(f.meta);
    const auto& g = f.meta;
    if (f.values.size() != g.size()) throw ConfigError("field payload size mismatch");
    Spectrum2D out(g);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            const cplx v = f.at(i, j);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NumericalError("non-finite field value at node (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
            out.at(i, j) = v * detail::checkerboard(i, j);
        }
    detail::fft_inplace(out.values, g.n1, g.n2, FFTW_FORWARD);
    const double h2 = g.cell();
    std::vector<cplx> ph1(g.n1), ph2(g.n2);
    for (int k = 0; k < g.n1; ++k) ph1[k] = std::polar(1.0, -2 * std::numbers::pi * g.origin1 * g.xi1(k));
    for (int k = 0; k < g.n2; ++k) ph2[k] = std::polar(1.0, -2 * std::numbers::pi * g.origin2 * g.xi2(k));
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) out.at(k1, k2) *= h2 * ph1[k1] * ph2[k2];
    return out;
}

// Inverse of dft_forward; the result is complex-tagged unless `real_output`.
inline SampledField2D dft_inverse(const Spectrum2D& F, bool real_output = false) {
    validate_meta(F.meta);
    const auto& g = F.meta;
    if (F.values.size() != g.size()) throw ConfigError("spectrum payload size mismatch");
    SampledField2D out(g, !real_output);
    std::vector<cplx> ph1(g.n1), ph2(g.n2);
    for (int k = 0; k < g.n1; ++k) ph1[k] = std::polar(1.0, 2 * std::numbers::pi * g.origin1 * g.xi1(k));
    for (int k = 0; k < g.n2; ++k) ph2[k] = std::polar(1.0, 2 * std::numbers::pi * g.origin2 * g.xi2(k));
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) out.at(k1, k2) = F.at(k1, k2) * ph1[k1] * ph2[k2];
    detail::fft_inplace(out.values, g.n1, g.n2, FFTW_BACKWARD);
    const double dxi2 = g.freq_cell();
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            cplx& v = out.at(i, j);
            v *= dxi2 * detail::checkerboard(i, j);
            if (real_output) v = {v.real(), 0.0};
        }
    return out;
}

// Sum |f|^2 h^2 (continuous L2 norm squared on the periodic cell).
inline double l2_norm_sq(const SampledField2D& f) {
    double s = 0;
    for (const auto& v : f.values) s += std::norm(v);
    return s * f.meta.cell();
}

inline double l2_norm_sq(const Spectrum2D& F) {
    double s = 0;
    for (const auto& v : F.values) s += std::norm(v);
    return s * F.meta.freq_cell();
}

// Relative L2 distance ||a-b|| / ||b||.
inline double relative_l2(const SampledField2D& a, const SampledField2D& b) {
    if (a.values.size() != b.values.size()) throw ConfigError("relative_l2: size mismatch");
    double num = 0, den = 0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        num += std::norm(a.values[k] - b.values[k]);
        den += std::norm(b.values[k]);
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

// --- SF2D: "SF2D n1 n2 spacing origin1 origin2 dtype\n" + little-endian payload.

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* what) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError(std::string("malformed ") + what + ": '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, const char* what) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError(std::string("malformed ") + what + ": '" + s + "'");
    return v;
}

inline bool little_endian_host() {
    const std::uint16_t probe = 1;
    unsigned char c;
    std::memcpy(&c, &probe, 1);
    return c == 1;
}

inline void write_le_doubles(std::ostream& os, const double* p, std::size_t n) {
    if (little_endian_host()) {
        os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
        return;
    }
    for (std::size_t k = 0; k < n; ++k) {
        char b[8];
        std::memcpy(b, p + k, 8);
        std::reverse(b, b + 8);
        os.write(b, 8);
    }
}

inline void read_le_doubles(std::istream& is, double* p, std::size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != n * sizeof(double)) throw IoError("truncated payload");
    if (!little_endian_host())
        for (std::size_t k = 0; k < n; ++k) {
            char b[8];
            std::memcpy(b, p + k, 8);
            std::reverse(b, b + 8);
            std::memcpy(p + k, b, 8);
        }
}

}  // namespace detail

inline void write_sf2d(std::ostream& os, const SampledField2D& f) {
    const auto& g = f.meta;
    os << "SF2D " << g.n1 << ' ' << g.n2 << ' ' << detail::fmt_double(g.spacing) << ' '
       << detail::fmt_double(g.origin1) << ' ' << detail::fmt_double(g.origin2) << ' '
       << (f.is_complex ? "c128" : "f64") << '\n';
    if (f.is_complex) {
        detail::write_le_doubles(os, reinterpret_cast<const double*>(f.values.data()), 2 * f.values.size());
    } else {
        std::vector<double> re(f.values.size());
        for (std::size_t k = 0; k < re.size(); ++k) re[k] = f.values[k].real();
        detail::write_le_doubles(os, re.data(), re.size());
    }
}

inline SampledField2D read_sf2d(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw IoError("missing SF2D header");
    std::istringstream hs(header);
    std::string magic, n1, n2, h, o1, o2, dtype, extra;
    hs >> magic >> n1 >> n2 >> h >> o1 >> o2 >> dtype;
    if (magic != "SF2D" || dtype.empty() || (hs >> extra)) throw IoError("malformed SF2D header: '" + header + "'");
    GridMeta g{detail::parse_int(n1, "n1"), detail::parse_int(n2, "n2"), detail::parse_double(h, "spacing"),
               detail::parse_double(o1, "origin1"), detail::parse_double(o2, "origin2")};
    try {
        validate_meta(g);
    } catch (const ConfigError& e) {
        throw IoError(std::string("invalid SF2D grid: ") + e.what());
    }
    if (dtype != "f64" && dtype != "c128") throw IoError("unknown SF2D dtype '" + dtype + "'");
    SampledField2D f(g, dtype == "c128");
    if (f.is_complex) {
        detail::read_le_doubles(is, reinterpret_cast<double*>(f.values.data()), 2 * f.values.size());
    } else {
        std::vector<double> re(f.values.size());
        detail::read_le_doubles(is, re.data(), re.size());
        for (std::size_t k = 0; k < re.size(); ++k) f.values[k] = re[k];
    }
    if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after SF2D payload");
    for (const auto& v : f.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw IoError("non-finite SF2D value");
    return f;
}

inline void save_sf2d(const std::string& path, const SampledField2D& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_sf2d(os, f);
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline SampledField2D load_sf2d(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_sf2d(is);
}

// Samples fn(x1, x2) on the grid.
template <class Fn>
SampledField2D sample_field(const GridMeta& g, Fn&& fn, bool cplx_valued = false) {
    SampledField2D f(g, cplx_valued);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) f.at(i, j) = fn(g.x1(i), g.x2(j));
    return f;
}

// Applies a frequency multiplier m(xi1, xi2) to f.
template <class Fn>
SampledField2D apply_multiplier(const SampledField2D& f, Fn&& m) {
    Spectrum2D F = dft_forward(f);
    const auto& g = F.meta;
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) F.at(k1, k2) *= m(g.xi1(k1), g.xi2(k2));
    SampledField2D out = dft_inverse(F);
    out.is_complex = f.is_complex;
    if (!f.is_complex)
        for (auto& v : out.values) v = {v.real(), 0.0};
    return out;
}

}  // namespace shearscope
