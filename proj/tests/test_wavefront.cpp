#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <shearscope/radon.hpp>
#include <shearscope/wavefront.hpp>

#include "oracles.hpp"

using namespace shearscope;

namespace {

GridMeta centered(int n, double h) { return {n, n, h, -n * h / 2, -n * h / 2}; }

// Node index of the geometric centre of a centered grid.
int mid(const GridMeta& g) { return g.n1 / 2; }

// One-node decay slope over [lo, hi] at t = (i, j) and shear s.
SlopeFit node_slope(const SampledField2D& f, const ShearletSpec& spec, int i, int j, double s, double lo, double hi,
                    Chart chart = Chart::horizontal) {
    const auto a = make_scale_grid(lo, hi, 8);
    const std::vector<double> sg = s == 0 ? std::vector<double>{0} : std::vector<double>{-s, 0, s};
    const auto vol = shearlet_transform(f, spec, a, sg, chart);
    return decay_slope(vol, i, j, static_cast<int>(sg.size()) - 1, 0, static_cast<int>(a.size()) - 1, volume_floor(vol));
}

// Largest N on a fine grid over [-20, 40] satisfying the inverse-theorem
// inequality strictly for some alpha on the grid.
double brute_inverse(const ExpectedExponentBudget& b) {
    double best = -kInf;
    for (int k = -20000; k <= 40000; ++k) {
        const double N = k * 1e-3;
        for (double al : alpha_grid()) {
            const double rhs = std::min({b.K - 0.75, (1 - al) * (b.M + N) - 0.75, (al - 0.5) * b.L - 0.75,
                                         2 * (b.L2 - b.M + 1), 2 * (b.L1 + 1)});
            if (N + 2 < rhs) {
                best = N;
                break;
            }
        }
    }
    return best;
}

}  // namespace

TEST(DecayFit, RecoversPowerLaw) {
    std::vector<double> la, lm;
    for (int i = 0; i < 10; ++i) {
        la.push_back(std::log(0.01 * std::pow(2.0, i / 4.0)));
        lm.push_back(std::log(3.0) + 1.75 * la.back());
    }
    const auto f = fit_log_slope(la, lm, -kInf);
    EXPECT_NEAR(f.slope, 1.75, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.used, 10);
    EXPECT_FALSE(f.at_floor);
}

TEST(DecayFit, FloorExcludesSamples) {
    std::vector<double> la, lm;
    for (int i = 0; i < 10; ++i) {
        la.push_back(i * 0.1);
        lm.push_back(i < 5 ? -100.0 : 2.0 * la.back());
    }
    const auto f = fit_log_slope(la, lm, -50);
    EXPECT_TRUE(f.at_floor);
    EXPECT_TRUE(std::isinf(f.slope));
    EXPECT_EQ(f.used, 5);
    lm[4] = 2.0 * la[4];
    const auto g = fit_log_slope(la, lm, -50);
    EXPECT_FALSE(g.at_floor);
    EXPECT_NEAR(g.slope, 2.0, 1e-12);
}

TEST(DecayFit, RangeChecks) {
    const auto g = centered(16, 0.25);
    const auto vol = shearlet_transform(SampledField2D(g), make_dog_generator(2), make_scale_grid(0.25, 1, 4), {0});
    EXPECT_THROW(decay_slope(vol, 0, 0, 0, 0, 4, 0), ConfigError);
    EXPECT_THROW(decay_slope(vol, 0, 0, 1, 0, 8, 0), ConfigError);
    // All zero: at floor, counted as maximal decay.
    EXPECT_TRUE(decay_slope(vol, 0, 0, 0, 0, 8, 0).at_floor);
    EXPECT_THROW(scale_range(vol.a_grid, 2, 4), ConfigError);
    const auto [lo, hi] = scale_range(vol.a_grid, 0.25, 0.5);
    EXPECT_EQ(lo, 0);
    EXPECT_EQ(hi, 4);
}

TEST(Budget, DirectExponent) {
    EXPECT_TRUE(std::isinf(expected_direct_exponent({})));
    ExpectedExponentBudget b;
    b.M = 2;
    b.alpha = 0.75;
    EXPECT_DOUBLE_EQ(expected_direct_exponent(b), 0.5);
    ExpectedExponentBudget z;
    z.N = 0;
    EXPECT_LE(expected_direct_exponent(z), -0.75);
    ExpectedExponentBudget bad;
    bad.alpha = 0.5;
    EXPECT_THROW(expected_direct_exponent(bad), ConfigError);
}

TEST(Budget, DirectExponentMaximizesOverAlpha) {
    ExpectedExponentBudget b;
    b.M = 4;
    b.L = 8;
    // (1 - a) 4 = (a - 1/2) 8 at a = 2/3, between grid nodes.
    double best = -kInf;
    for (double al : alpha_grid()) best = std::max(best, std::min((1 - al) * 4, (al - 0.5) * 8));
    EXPECT_DOUBLE_EQ(expected_direct_exponent(b), best);
    EXPECT_NEAR(best, 4.0 / 3, 0.02);
}

TEST(Budget, InverseAllInfinite) {
    ExpectedExponentBudget b;
    b.K = 6;
    const auto r = expected_inverse_budget(b);
    EXPECT_DOUBLE_EQ(r.n_sup, 6 - 2.75);
    EXPECT_TRUE(r.certified);
    b.K = 2.75;
    EXPECT_FALSE(expected_inverse_budget(b).certified);
    b.K = 2;
    EXPECT_FALSE(expected_inverse_budget(b).certified);
}

TEST(Budget, InverseMatchesBruteForce) {
    ExpectedExponentBudget b;
    b.M = 4;
    b.L = 20;
    b.L1 = b.L2 = 20;
    b.K = 10;
    const auto r = expected_inverse_budget(b);
    EXPECT_NEAR(r.n_sup, brute_inverse(b), 1.01e-3);
    EXPECT_FALSE(r.certified);  // (1 - alpha) M never clears 11/4 with M = 4
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 5; ++k) {
        ExpectedExponentBudget c;
        c.M = 2 + 10 * u(rng);
        c.L = 5 + 40 * u(rng);
        c.L1 = 1 + 10 * u(rng);
        c.L2 = c.M + 10 * u(rng);
        c.K = 3 + 15 * u(rng);
        const auto rc = expected_inverse_budget(c);
        EXPECT_NEAR(rc.n_sup, brute_inverse(c), 1.01e-3);
    }
}

TEST(Wavefront, GaussianDecaysRapidly) {
    // The fit scales must be small against the bump: in the tail, where
    // |f| ~ eps, the finite-scale slope drops by about 2 ln(1/eps) a / sigma^2.
    const auto g = centered(128, 0.25);
    const double sigma = 5;
    const auto f = sample_field(g, [&](double x1, double x2) {
        return std::exp(-oracle::pi * (x1 * x1 + x2 * x2) / (sigma * sigma));
    });
    const auto spec = make_dog_generator(2);
    WavefrontOptions o;
    o.a_grid = make_scale_grid(g.spacing, 2 * g.spacing, 8);
    o.s_grid = make_shear_grid(1, 1.0 / 16);
    const auto vol = shearlet_transform(f, spec, o.a_grid, o.s_grid);
    const double floor = volume_floor(vol);
    const int na = static_cast<int>(o.a_grid.size());
    for (int j = 0; j < static_cast<int>(o.s_grid.size()); j += 4)
        for (int t1 = 0; t1 < g.n1; t1 += 8)
            for (int t2 = 0; t2 < g.n2; t2 += 8) {
                const auto fit = decay_slope(vol, t1, t2, j, 0, na - 1, floor);
                EXPECT_TRUE(fit.at_floor || fit.slope >= 1.8) << t1 << "," << t2 << " s=" << o.s_grid[j] << " k=" << fit.slope;
            }
    const auto map = wavefront_map(f, spec, o);
    EXPECT_EQ(map.detected_count(), 0u);
}

TEST(Wavefront, LineOnAndOffDirection) {
    const auto g = centered(256, 1.0 / 256);
    const double w = 2 * g.spacing;
    const auto f = make_line_singularity({0, 0, w}, g).field;
    const auto spec = make_dog_generator(2);
    const int c = mid(g);
    EXPECT_NEAR(node_slope(f, spec, c, c, 0, 1.0 / 8, 1.0 / 4).slope, -0.25, 0.1);
    EXPECT_GE(node_slope(f, spec, c, c, 0.5, 1.0 / 128, 1.0 / 64).slope, 1.0);
    // Off the line the ridge is smooth at the fit scales.
    EXPECT_GE(node_slope(f, spec, c + 16, c, 0, w, 2 * w).slope, 2.0);
}

TEST(Wavefront, LineMapAxes) {
    const auto g = centered(256, 1.0 / 256);
    const double w = 2 * g.spacing;
    const auto f = make_line_singularity({0, 0, w}, g).field;
    WavefrontOptions o;
    o.a_grid = make_scale_grid(3 * w, 6 * w, 8);
    o.s_grid = make_shear_grid(1, 1.0 / 16);
    const auto m = wavefront_map(f, make_dog_generator(6), o);
    const std::size_t plane = g.size();
    const int c = mid(g);
    for (std::size_t j = 0; j < m.d1.s_grid.size(); ++j) {
        const double s = m.d1.s_grid[j];
        const auto t = static_cast<std::size_t>(c) * g.n2 + c;
        if (s == 0) {
            EXPECT_FALSE(m.d1.in_d[j * plane + t]);
            for (int d = 8; d < 64; ++d)
                EXPECT_TRUE(m.d1.in_d[j * plane + static_cast<std::size_t>(c + d) * g.n2 + c]) << d;
        }
        if (std::abs(s) >= 0.25) {
            EXPECT_TRUE(m.d1.in_d[j * plane + t]) << s;
        }
    }
    for (auto v : m.d2.in_d) EXPECT_TRUE(v);
}

TEST(Wavefront, SteepLineIsSeenByTheDualChart) {
    const auto g = centered(256, 1.0 / 256);
    const double w = 4 * g.spacing;
    const auto f = make_line_singularity({2, 0, w}, g).field;
    WavefrontOptions o;
    o.a_grid = make_scale_grid(3 * w, 6 * w, 8);
    o.s_grid = make_shear_grid(1, 1.0 / 16);
    const auto m = wavefront_map(f, make_dog_generator(6), o);
    const std::size_t plane = g.size();
    const auto t = static_cast<std::size_t>(mid(g)) * g.n2 + mid(g);
    for (std::size_t j = 0; j < m.d1.s_grid.size(); ++j) EXPECT_TRUE(m.d1.in_d[j * plane + t]) << m.d1.s_grid[j];
    const auto half = std::find(m.d2.s_grid.begin(), m.d2.s_grid.end(), 0.5) - m.d2.s_grid.begin();
    EXPECT_FALSE(m.d2.in_d[static_cast<std::size_t>(half) * plane + t]);
    const auto zero = std::find(m.d2.s_grid.begin(), m.d2.s_grid.end(), 0.0) - m.d2.s_grid.begin();
    EXPECT_TRUE(m.d2.in_d[static_cast<std::size_t>(zero) * plane + t]);
}

TEST(Wavefront, CutoffStability) {
    const auto g = centered(256, 1.0 / 256);
    const double w = 2 * g.spacing;
    const auto f = make_line_singularity({0, 0, w}, g).field;
    const auto fphi = make_line_singularity({0, 0, w, 0, 0, 0.8}, g).field;
    const auto spec = make_dog_generator(2);
    const auto a = make_scale_grid(1.0 / 128, 1.0 / 64, 8);
    const auto s = make_shear_grid(1, 1.0 / 8);
    const auto v = shearlet_transform(f, spec, a, s), vphi = shearlet_transform(fphi, spec, a, s);
    const int c = mid(g), na = static_cast<int>(a.size());
    for (int j = 0; j < static_cast<int>(s.size()); ++j) {
        const auto k = decay_slope(v, c, c, j, 0, na - 1, volume_floor(v));
        const auto kphi = decay_slope(vphi, c, c, j, 0, na - 1, volume_floor(vphi));
        EXPECT_NEAR(kphi.slope, k.slope, 0.2) << s[j];
    }
}

TEST(Wavefront, ConeProjectionStability) {
    const auto g = centered(256, 1.0 / 256);
    const double w = 2 * g.spacing;
    const auto f = make_line_singularity({0, 0, w, 0, 0, 0.8}, g).field;
    const auto spec = make_dog_generator(2);
    const auto a = make_scale_grid(1.0 / 128, 1.0 / 64, 8);
    const auto s = make_shear_grid(1, 1.0 / 8);
    const int c = mid(g), na = static_cast<int>(a.size());
    for (double v : {1.25, 2.0}) {
        const auto p = cone_project(f, ConeSpec{1, v, Chart::horizontal});
        const auto vf = shearlet_transform(f, spec, a, s), vp = shearlet_transform(p, spec, a, s);
        for (int j = 0; j < static_cast<int>(s.size()); ++j) {
            const auto k = decay_slope(vf, c, c, j, 0, na - 1, volume_floor(vf));
            const auto kp = decay_slope(vp, c, c, j, 0, na - 1, volume_floor(vp));
            EXPECT_NEAR(kp.slope, k.slope, 0.2) << "v=" << v << " s=" << s[j];
        }
    }
}

TEST(Wavefront, ChartConsistency) {
    // A localized line of slope 7/8 seen at s = 7/8 by psi and sigma = 8/7 by psi_nu.
    const auto g = centered(256, 1.0 / 256);
    const double w = 3 * g.spacing, s0 = 7.0 / 8;
    const auto f = make_line_singularity({s0, 0, w, 0, 0, 0.8}, g).field;
    const auto spec = make_dog_generator(2);
    const int c = mid(g);
    for (auto [i, j] : {std::pair{c, c}, {c + 2, c}}) {
        const auto k1 = node_slope(f, spec, i, j, s0, 1.0 / 128, 1.0 / 64);
        const auto k2 = node_slope(f, spec, i, j, 1 / s0, 1.0 / 128, 1.0 / 64, Chart::vertical);
        EXPECT_NEAR(k1.slope, k2.slope, 0.3) << i;
    }
}

TEST(Wavefront, TranslationCovariance) {
    const auto g = centered(64, 1.0 / 64);
    const auto f = make_line_singularity({1, 0.05, 3.0 / 64}, g).field;
    const int m1 = 5, m2 = 9;
    SampledField2D fs(g);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) fs.at((i + m1) % g.n1, (j + m2) % g.n2) = f.at(i, j);
    WavefrontOptions o = default_wavefront_options(g);
    const auto spec = make_dog_generator(2);
    const auto a = wavefront_map(f, spec, o), b = wavefront_map(fs, spec, o);
    std::size_t flips = 0, total = 0;
    for (const auto& [ca, cb] : {std::pair{&a.d1, &b.d1}, {&a.d2, &b.d2}})
        for (std::size_t j = 0; j < ca->s_grid.size(); ++j)
            for (int i = 0; i < g.n1; ++i)
                for (int k = 0; k < g.n2; ++k) {
                    const std::size_t ta = j * g.size() + static_cast<std::size_t>(i) * g.n2 + k;
                    const std::size_t tb = j * g.size() + static_cast<std::size_t>((i + m1) % g.n1) * g.n2 + (k + m2) % g.n2;
                    ++total;
                    flips += ca->in_d[ta] != cb->in_d[tb];
                    if (std::isfinite(ca->slope[ta])) {
                        EXPECT_NEAR(ca->slope[ta], cb->slope[tb], 1e-3);
                    }
                }
    EXPECT_EQ(flips, 0u) << "of " << total;
}

TEST(Wavefront, OptionsAreValidated) {
    const auto g = centered(32, 1.0 / 32);
    const SampledField2D f(g);
    const auto spec = make_dog_generator(2);
    auto o = default_wavefront_options(g);
    o.threshold = 0;
    EXPECT_THROW(wavefront_map(f, spec, o), ConfigError);
    o = default_wavefront_options(g);
    o.s_grid = make_shear_grid(0.5, 0.25);
    EXPECT_THROW(wavefront_map(f, spec, o), ConfigError);
    o = default_wavefront_options(g);
    o.a_grid.resize(5);
    EXPECT_THROW(wavefront_map(f, spec, o), ConfigError);
}

TEST(Wavefront, Outputs) {
    const auto g = centered(32, 1.0 / 32);
    const auto f = make_line_singularity({0, 0, 2.0 / 32}, g).field;
    const auto m = wavefront_map(f, make_dog_generator(2), default_wavefront_options(g));
    std::ostringstream csv;
    write_wavefront_csv(csv, m, 4);
    const auto text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "t1,t2,s,slope,r2,in_D,chart");
    const std::size_t rows = (m.d1.s_grid.size() + m.d2.s_grid.size()) * 8 * 8;
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows + 1);
    EXPECT_NE(text.find(",D2\n"), std::string::npos);
    EXPECT_NE(text.find(",inf,"), std::string::npos);  // sigma = 0 row
    EXPECT_THROW(write_wavefront_csv(csv, m, 0), ConfigError);
    std::ostringstream pgm;
    write_wavefront_pgm(pgm, m);
    const auto img = pgm.str();
    EXPECT_EQ(img.substr(0, 13), "P5\n32 32\n255\n");
    EXPECT_EQ(img.size(), 13u + 32 * 32);
    const auto j = to_json(m);
    EXPECT_EQ(j["threshold_k"], 2.0);
    EXPECT_EQ(j["d2_shears"], m.d2.s_grid.size());
}
