#pragma once

// Flag normalization shared by the command-line tool.

#include <optional>
#include <string>

#include "error.hpp"
#include "frames.hpp"
#include "grid.hpp"

namespace shearscope {

// Flags as parsed; unset values take the documented defaults.
struct RawConfig {
    std::optional<double> gamma, xi, u, v, slack, threshold, spacing;
    std::optional<int> n, threads;
    std::string orientation = "horizontal";
};

struct RunConfig {
    SystemParams params;
    int n = 128;
    double spacing = 1.0 / 16;
    double slack = 0.1;
    double threshold = 2.0;
    int threads = 0;  // 0: environment or hardware default
};

inline RunConfig validate_config(const RawConfig& raw) {
    RunConfig c;
    auto positive = [](const std::optional<double>& v, double def, const char* flag) {
        if (!v) return def;
        if (!(*v > 0) || !std::isfinite(*v))
            throw ConfigError(std::string(flag) + " must be a finite number > 0, got " + detail::fmt_double(*v));
        return *v;
    };
    c.params.gamma = positive(raw.gamma, 1.0, "--gamma");
    c.params.xi = positive(raw.xi, 2.0, "--xi");
    c.params.cone.v = positive(raw.v, 1.0, "--v");
    c.spacing = positive(raw.spacing, 1.0 / 16, "--spacing");
    c.threshold = positive(raw.threshold, 2.0, "--threshold");
    c.params.cone.u = raw.u.value_or(1.0);
    if (!(c.params.cone.u >= 0) || !std::isfinite(c.params.cone.u))
        throw ConfigError("--u must be a finite number >= 0, got " + detail::fmt_double(c.params.cone.u));
    c.params.cone.orientation = parse_chart(raw.orientation);
    if (raw.slack) {
        if (!(*raw.slack > 0 && *raw.slack < 1))
            throw ConfigError("--slack must lie in (0, 1), got " + detail::fmt_double(*raw.slack));
        c.slack = *raw.slack;
    }
    if (raw.n) {
        if (*raw.n < 8 || *raw.n % 2 != 0) throw ConfigError("--n must be even and >= 8, got " + std::to_string(*raw.n));
        c.n = *raw.n;
    }
    if (raw.threads) {
        if (*raw.threads < 0) throw ConfigError("--threads must be >= 0, got " + std::to_string(*raw.threads));
        c.threads = *raw.threads;
    }
    return c;
}

}  // namespace shearscope
