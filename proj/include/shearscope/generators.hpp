#pragma once

// Shearlet generators defined by closed-form Fourier transforms.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "error.hpp"
#include "grid.hpp"

namespace shearscope {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr int kInfiniteMoments = std::numeric_limits<int>::max();

struct DecayOrders {
    double L1 = kInf;   // psi_hat in xi1
    double L2 = kInf;   // theta_hat in xi2
    double L = kInf;    // psi_hat in xi2
    double tau = kInf;
    double mu = kInf;
};

struct ShearletSpec {
    std::function<cplx(double, double)> psi_hat;
    int declared_moments = 0;
    DecayOrders declared_decay;
    std::string label;
    // |psi_hat| is negligible (below ~1e-30 relative) outside [-R, R]^2.
    double support_radius = 8.0;

    cplx operator()(double xi1, double xi2) const { return psi_hat(xi1, xi2); }
    bool infinite_moments() const { return declared_moments == kInfiniteMoments; }
};

struct ShearParams {
    double a = 1.0;
    double s = 0.0;
    double t1 = 0.0, t2 = 0.0;
};

namespace detail {

inline cplx i_pow(int n) {
    switch (n & 3) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
    }
}

inline ShearletSpec gaussian_derivative(int n, std::string label) {
    const double pi = std::numbers::pi;
    const cplx phase = i_pow(n);
    ShearletSpec spec;
    spec.psi_hat = [n, phase, pi](double xi1, double xi2) -> cplx {
        return phase * std::pow(-2 * pi * xi1, n) * std::exp(-pi * (xi1 * xi1 + xi2 * xi2));
    };
    spec.declared_moments = n;
    spec.label = std::move(label);
    // (2 pi r)^n e^{-pi r^2} peaks near sqrt(n / 2 pi); pad generously.
    spec.support_radius = std::max(8.0, 2.0 * std::sqrt(n / (2 * pi)) + 6.0);
    return spec;
}

// Smooth step on [0,1], flat to third order at both ends.
inline double meyer_nu(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    return t * t * t * t * (35 - 84 * t + 70 * t * t - 20 * t * t * t);
}

inline double classical_psi1(double x) {
    const double b = std::abs(x);
    const double half_pi = std::numbers::pi / 2;
    if (b <= 0.5 || b >= 17.0 / 16.0) return 0;
    if (b < 0.625) return std::sin(half_pi * meyer_nu(8 * (b - 0.5)));
    if (b <= 1.0) return 1;
    return std::cos(half_pi * meyer_nu(16 * (b - 1)));
}

inline double bump_raw(double eta) {
    if (std::abs(eta) >= 1) return 0;
    return std::exp(-1.0 / (1.0 - eta * eta));
}

// c such that the integral of (c * bump)^2 over (-1,1) is 1. The integrand is
// flat at the endpoints, so a plain trapezoid converges spectrally.
inline double bump_norm() {
    static const double c = [] {
        const int n = 1 << 14;
        double s = 0;
        for (int k = 1; k < n; ++k) {
            double v = bump_raw(-1.0 + 2.0 * k / n);
            s += v * v;
        }
        return 1.0 / std::sqrt(s * 2.0 / n);
    }();
    return c;
}

}  // namespace detail

inline ShearletSpec make_dog_generator(int n) {
    if (n < 1) throw ConfigError("dog generator needs n >= 1 (n = 0 is not admissible), got " + std::to_string(n));
    return detail::gaussian_derivative(n, "dog:" + std::to_string(n));
}

// Separable stand-in for tensor wavelets: (-2 pi i xi1)^M e^{-pi xi1^2} e^{-pi xi2^2}.
inline ShearletSpec make_tensor_generator(int m) {
    if (m < 1) throw ConfigError("tensor generator needs M >= 1, got " + std::to_string(m));
    return detail::gaussian_derivative(m, "tensor:" + std::to_string(m));
}

// psi_hat(xi) = psi1(xi1) psi2(xi2 / xi1). psi1 is a smooth bump on
// [1/2, 17/16] (plateau on [5/8, 1]); psi2 = c exp(-1/(1-eta^2)) on (-1, 1).
inline ShearletSpec make_classical_cone_generator() {
    const double c = detail::bump_norm();
    ShearletSpec spec;
    spec.psi_hat = [c](double xi1, double xi2) -> cplx {
        if (xi1 == 0) return 0.0;
        const double p1 = detail::classical_psi1(xi1);
        if (p1 == 0) return 0.0;
        return p1 * c * detail::bump_raw(xi2 / xi1);
    };
    spec.declared_moments = kInfiniteMoments;
    spec.label = "classical";
    spec.support_radius = 2.0;
    return spec;
}

// Coordinate swap: psi_nu_hat(xi1, xi2) = psi_hat(xi2, xi1). Applying it twice
// restores the original label.
inline ShearletSpec make_nu(const ShearletSpec& spec) {
    ShearletSpec out = spec;
    auto inner = spec.psi_hat;
    out.psi_hat = [inner](double xi1, double xi2) { return inner(xi2, xi1); };
    const std::string prefix = "nu(";
    if (spec.label.rfind(prefix, 0) == 0 && spec.label.back() == ')')
        out.label = spec.label.substr(prefix.size(), spec.label.size() - prefix.size() - 1);
    else
        out.label = prefix + spec.label + ")";
    return out;
}

// a^{3/4} e^{-2 pi i t.xi} psi_hat(a xi1, sqrt(a) (xi2 - s xi1)).
inline cplx psi_ast_hat(const ShearletSpec& spec, const ShearParams& p, double xi1, double xi2) {
    const double phase = -2 * std::numbers::pi * (p.t1 * xi1 + p.t2 * xi2);
    return std::pow(p.a, 0.75) * std::polar(1.0, phase) * spec(p.a * xi1, std::sqrt(p.a) * (xi2 - p.s * xi1));
}

// Labels: dog:<n>, classical, tensor:<M>.
inline ShearletSpec parse_generator(const std::string& label) {
    auto number_after = [&](const std::string& prefix) -> int {
        const std::string tail = label.substr(prefix.size());
        int v = 0;
        auto res = std::from_chars(tail.data(), tail.data() + tail.size(), v);
        if (tail.empty() || res.ec != std::errc() || res.ptr != tail.data() + tail.size())
            throw ConfigError("generator label '" + label + "': expected an integer after '" + prefix + "'");
        return v;
    };
    if (label == "classical") return make_classical_cone_generator();
    if (label.rfind("dog:", 0) == 0) return make_dog_generator(number_after("dog:"));
    if (label.rfind("tensor:", 0) == 0) return make_tensor_generator(number_after("tensor:"));
    throw ConfigError("unknown generator '" + label + "' (expected dog:<n>, classical or tensor:<M>)");
}

}  // namespace shearscope
