#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include <shearscope/frames.hpp>

#include "oracles.hpp"

using namespace shearscope;

namespace {

struct Dog2 {
    ShearletSpec spec = make_dog_generator(2);
    DeltaQuadrature q{spec};
    FrameConstant c = frame_constant(spec);
};

const Dog2& dog2() {
    static const Dog2 d;
    return d;
}

SampledField2D cone_field(const GridMeta& g, std::uint64_t seed, double lo, double hi, const ConeSpec& c = {}) {
    return oracle::random_bandlimited(g, seed, lo, hi, [&](double x1, double x2) { return in_cone(c, x1, x2); });
}

double spectral_energy(const SampledField2D& f, const std::function<double(double, double)>& m) {
    const auto F = dft_forward(f);
    double e = 0;
    for (int k1 = 0; k1 < F.meta.n1; ++k1)
        for (int k2 = 0; k2 < F.meta.n2; ++k2) e += std::norm(F.at(k1, k2)) * m(F.meta.xi1(k1), F.meta.xi2(k2));
    return e * F.meta.freq_cell();
}

}  // namespace

TEST(Frames, UntruncatedDeltaIsTheGroupConstant) {
    const auto& d = dog2();
    const SystemParams full{0x1p12, 0x1p10, {0, kInf, Chart::horizontal}};
    for (auto [x1, x2] : {std::pair{1.0, 0.0}, {2.0, 1.0}, {-4.0, 2.0}}) {
        const double delta = delta_at(d.q, full, x1, x2);
        EXPECT_NEAR(delta / d.c.at(x1), 1.0, 0.02) << x1 << "," << x2;
    }
}

TEST(Frames, DeltaOfZeroGeneratorVanishes) {
    ShearletSpec zero;
    zero.psi_hat = [](double, double) { return cplx(0.0); };
    zero.declared_moments = 1;
    const DeltaQuadrature q(zero);
    GridMeta g{16, 16, 0.125, -1, -1};
    for (double v : compute_delta(q, SystemParams{}, g)) EXPECT_EQ(v, 0.0);
}

TEST(Frames, DeltaVanishesOutsideTheCone) {
    const auto& d = dog2();
    const SystemParams p;
    EXPECT_EQ(delta_at(d.q, p, 0.5, 0.0), 0.0);  // |xi1| < u
    EXPECT_EQ(delta_at(d.q, p, 2.0, 3.0), 0.0);  // |xi2| > v |xi1|
    EXPECT_GT(delta_at(d.q, p, 2.0, 1.0), 0.0);
    SystemParams vert;
    vert.cone.orientation = Chart::vertical;
    EXPECT_EQ(delta_at(d.q, vert, 2.0, 1.0), 0.0);
    EXPECT_NEAR(delta_at(d.q, vert, 1.0, 2.0), delta_at(d.q, p, 2.0, 1.0), 1e-14);
}

TEST(Frames, DeltaIsMonotoneInTruncation) {
    const auto& d = dog2();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> r1(1, 30), sl(-1, 1);
    for (int k = 0; k < 50; ++k) {
        const double x1 = r1(rng) * (k % 2 ? -1 : 1), x2 = sl(rng) * std::abs(x1);
        double prev = 0;
        for (double g : {0.25, 0.5, 1.0, 2.0, 8.0}) {
            const double v = d.q(x1, x2, g, 2.0);
            EXPECT_GE(v, prev - 1e-12);
            prev = v;
        }
        prev = 0;
        for (double xi : {0.5, 1.0, 2.0, 4.0, 16.0}) {
            const double v = d.q(x1, x2, 1.0, xi);
            EXPECT_GE(v, prev - 1e-12);
            prev = v;
        }
    }
}

TEST(Frames, DeltaMatchesBruteForceIntegral) {
    // Direct (log a, s) trapezoid at a moderate truncation where it converges.
    const auto& d = dog2();
    for (auto [x1, x2] : {std::pair{3.0, 1.0}, {-5.0, 2.5}}) {
        const double gamma = 1, xi = 2;
        const int na = 4000, ns = 4001;
        const double lo = std::log(1e-7), hi = std::log(gamma), dl = (hi - lo) / na, ds = 2 * xi / (ns - 1);
        double total = 0;
        for (int i = 0; i <= na; ++i) {
            const double a = std::exp(lo + i * dl);
            double row = 0;
            for (int j = 0; j < ns; ++j) {
                const double s = -xi + j * ds;
                row += (j == 0 || j == ns - 1 ? 0.5 : 1.0) * std::norm(d.spec(a * x1, std::sqrt(a) * (x2 - s * x1)));
            }
            total += (i == 0 || i == na ? 0.5 : 1.0) * row * ds * std::pow(a, -1.5) * a;
        }
        total *= dl;
        EXPECT_NEAR(d.q(x1, x2, gamma, xi) / total, 1.0, 1e-4);
    }
}

TEST(Frames, ClassicalBoundsAreTight) {
    const auto spec = make_classical_cone_generator();
    const DeltaQuadrature q(spec);
    const auto r = frame_bounds(spec, q, SystemParams{});
    ASSERT_TRUE(r.is_frame);
    EXPECT_LE(r.ratio_interior, 1.1);
    EXPECT_LE(r.a_bound, r.b_bound);
}

TEST(Frames, DogTwoIsAFrameAtLargeTruncation) {
    const auto& d = dog2();
    const auto r = frame_bounds(d.spec, d.q, SystemParams{64, 64, {}});
    EXPECT_TRUE(r.is_frame);
    EXPECT_GT(r.a_bound, 0);
    EXPECT_TRUE(std::isfinite(r.b_bound));
    EXPECT_EQ(r.verdict, "frame");
}

TEST(Frames, NoMomentsIsRejected) {
    ShearletSpec theta;
    theta.psi_hat = [](double x1, double x2) -> cplx { return std::exp(-oracle::pi * (x1 * x1 + x2 * x2)); };
    const DeltaQuadrature q(theta);
    EXPECT_THROW(frame_bounds(theta, q, SystemParams{}), NumericalError);
}

TEST(Frames, SelectTruncation) {
    const auto& d = dog2();
    const auto t = select_truncation(d.spec, d.q, d.c, ConeSpec{}, 0.1);
    const auto r = frame_bounds(d.spec, d.q, t.params);
    EXPECT_TRUE(r.is_frame);
    EXPECT_LE(r.ratio, 1.0 / (1 - 0.1));
    // A tighter slack forces larger truncation.
    const auto t2 = select_truncation(d.spec, d.q, d.c, ConeSpec{}, 0.001);
    EXPECT_GT(t2.params.gamma, t.params.gamma);
    EXPECT_LT(t2.worst_tail, 0.001);
    EXPECT_THROW(select_truncation(d.spec, d.q, d.c, ConeSpec{}, 0.0), ConfigError);
    EXPECT_THROW(select_truncation(d.spec, d.q, d.c, ConeSpec{}, 1.0), ConfigError);
    const auto one = make_dog_generator(1);
    EXPECT_THROW(select_truncation(one, DeltaQuadrature(one), frame_constant(one), ConeSpec{}, 0.1), NumericalError);
}

TEST(Frames, SelectTruncationKeepsClassicalDefaults) {
    const auto spec = make_classical_cone_generator();
    const DeltaQuadrature q(spec);
    const auto t = select_truncation(spec, q, frame_constant(spec), ConeSpec{}, 0.1);
    EXPECT_EQ(t.doublings, 0);
    EXPECT_EQ(t.params.gamma, 1.0);
    EXPECT_EQ(t.params.xi, 2.0);
    // The shear range already covers the support: no shear tail.
    EXPECT_LE(t.worst_shear_tail, 1e-4);
}

TEST(Frames, TightWindow) {
    const auto& d = dog2();
    GridMeta g{64, 64, 1.0 / 8, -4, -4};
    const SystemParams big{0x1p12, 0x1p10, {}};
    const auto w = synthesize_tight_window(d.spec, d.q, d.c, big, g);
    EXPECT_EQ(w.provenance, "tight");
    for (int k1 = 0; k1 < g.n1; ++k1)
        for (int k2 = 0; k2 < g.n2; ++k2) {
            const double x1 = g.xi1(k1), x2 = g.xi2(k2), v = w.w_hat_sq[static_cast<std::size_t>(k1) * g.n2 + k2];
            EXPECT_GE(v, 0.0);
            if (!in_cone(big.cone, x1, x2)) {
                EXPECT_EQ(v, 0.0);
            } else {
                EXPECT_LE(v, 1e-3 * d.c.at(x1));
            }
        }
    EXPECT_THROW(synthesize_tight_window(d.spec, d.q, d.c, SystemParams{1, 1, {}}, g), NumericalError);
}

TEST(Frames, TightReconstructionIsExact) {
    const auto& d = dog2();
    GridMeta g{64, 64, 1.0 / 8, -4, -4};
    const SystemParams p;
    const auto w = synthesize_tight_window(d.spec, d.q, d.c, p, g);
    for (int seed = 0; seed < 3; ++seed) {
        const auto f = oracle::random_bandlimited(g, 40 + seed, 0, 4, [](double, double) { return true; });
        const auto rec = reconstruct_cone(f, d.q, d.c, p, w);
        EXPECT_LE(relative_l2(rec, cone_project(f, p.cone)), 1e-10);
    }
    EXPECT_LE(std::sqrt(l2_norm_sq(reconstruct_cone(SampledField2D(g), d.q, d.c, p, w))), 0.0);
}

TEST(Frames, UntruncatedReconstructionWithoutWindow) {
    const auto& d = dog2();
    GridMeta g{64, 64, 1.0 / 8, -4, -4};
    const SystemParams p{0x1p12, 0x1p10, {}};
    const auto f = cone_field(g, 5, 1, 4);
    const auto rec = reconstruct_cone(f, d.q, d.c, p, zero_window(g));
    EXPECT_LE(relative_l2(rec, f), 0.02);
}

TEST(Frames, DiscreteSynthesisMatchesBruteForce) {
    // 32^2 field, 4 scales, 5 shears: the multiplier collapse of the t-integral
    // against explicit synthesis from sampled atoms.
    const auto spec = make_dog_generator(2);
    const auto c = frame_constant(spec);
    GridMeta g{32, 32, 1.0 / 4, -4, -4};
    const SystemParams p{1, 1, {}};
    const auto f = cone_field(g, 9, 1, 2);
    const std::vector<double> a{0.125, 0.25, 0.5, 1.0}, s{-1, -0.5, 0, 0.5, 1};
    const auto rec = reconstruct_cone_discrete(f, spec, c, p, zero_window(g), a, s);

    const auto vol = shearlet_transform(f, spec, a, s);
    const auto wa = scale_weights(a), ws = shear_weights(s);
    SampledField2D brute(g, true);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            // Atom centred at t = x(0, 0), then shifted periodically.
            Spectrum2D A(g);
            for (int k1 = 0; k1 < g.n1; ++k1)
                for (int k2 = 0; k2 < g.n2; ++k2)
                    A.at(k1, k2) = psi_ast_hat(spec, {a[i], s[j], g.x1(0), g.x2(0)}, g.xi1(k1), g.xi2(k2));
            const auto atom = dft_inverse(A);
            const double wt = wa[i] * ws[j] / (a[i] * a[i] * a[i]) * g.cell();
            for (int t1 = 0; t1 < g.n1; ++t1)
                for (int t2 = 0; t2 < g.n2; ++t2) {
                    const cplx coef = vol.at(i, j, t1, t2) * wt;
                    for (int x1 = 0; x1 < g.n1; ++x1)
                        for (int x2 = 0; x2 < g.n2; ++x2)
                            brute.at(x1, x2) += coef * atom.at((x1 - t1 + g.n1) % g.n1, (x2 - t2 + g.n2) % g.n2);
                }
        }
    for (auto& v : brute.values) v /= c.positive;
    EXPECT_LE(relative_l2(rec, brute), 1e-6);
}

TEST(Frames, MultiplierIdentityWithMatchedQuadrature) {
    const auto& d = dog2();
    GridMeta g{64, 64, 1.0 / 8, -4, -4};
    const auto a = make_scale_grid(1.0 / 64, 1, 8);
    const auto s = make_shear_grid(2, 0.125);
    for (int seed = 0; seed < 2; ++seed) {
        const auto f = cone_field(g, 70 + seed, 1, 4);
        const double energy = coefficient_energy(f, d.spec, a, s);
        const double predicted = spectral_energy(f, [&](double x1, double x2) {
            return in_horizontal_cone(x1, x2, 1, 1) ? delta_discrete(d.spec, a, s, Chart::horizontal, x1, x2) : 0.0;
        });
        EXPECT_NEAR(energy / predicted, 1.0, 0.01);
    }
}

TEST(Frames, FrameSandwich) {
    const auto& d = dog2();
    const SystemParams p{4, 4, {}};
    const auto r = frame_bounds(d.spec, d.q, p);
    GridMeta g{64, 64, 1.0 / 8, -4, -4};
    for (int seed = 0; seed < 20; ++seed) {
        const auto f = cone_field(g, 100 + seed, 1, 4);
        const double e = spectral_energy(f, [&](double x1, double x2) { return delta_at(d.q, p, x1, x2); });
        const double n2 = l2_norm_sq(f);
        EXPECT_GE(e, 0.99 * r.a_bound * n2);
        EXPECT_LE(e, 1.01 * r.b_bound * n2);
    }
}

TEST(Frames, BoundsBoxWindowKeepsEnergyInBounds) {
    const auto& d = dog2();
    const SystemParams ph{4, 4, {1, 1, Chart::horizontal}}, pv{4, 4, {1, 1, Chart::vertical}};
    const auto rh = frame_bounds(d.spec, d.q, ph), rv = frame_bounds(d.spec, d.q, pv);
    const double A = std::min(rh.a_bound, rv.a_bound), B = std::max(rh.b_bound, rv.b_bound);
    GridMeta g{64, 64, 1.0 / 8, -4, -4};
    const double wconst = 0.5 * (A + B);
    for (int seed = 0; seed < 5; ++seed) {
        const auto f = oracle::random_bandlimited(g, 300 + seed, 0, 4, [](double, double) { return true; });
        const double e = spectral_energy(f, [&](double x1, double x2) {
            if (in_lowpass(x1, x2)) return wconst;
            return delta_at(d.q, ph, x1, x2) + delta_at(d.q, pv, x1, x2);
        });
        const double n2 = l2_norm_sq(f);
        EXPECT_GE(e, 0.99 * A * n2);
        EXPECT_LE(e, 1.01 * B * n2);
    }
}

TEST(Frames, FullReconstruction) {
    const auto& d = dog2();
    GridMeta g{128, 128, 1.0 / 16, -4, -4};
    const auto w = gaussian_window(d.c.max(), g);
    const auto f = oracle::random_bandlimited(g, 77, 0, 7, [](double, double) { return true; });
    const auto r = reconstruct_full(f, d.q, w);
    EXPECT_GT(r.omega_min, 0);
    EXPECT_LE(relative_l2(r.field, f), 1e-10);
    EXPECT_THROW(reconstruct_full(f, d.q, zero_window(g)), NumericalError);
}

TEST(Frames, WindowAndParamsRoundTrip) {
    const auto& d = dog2();
    GridMeta g{16, 16, 0.5, -4, -4};
    const auto w = synthesize_tight_window(d.spec, d.q, d.c, SystemParams{2, 3, {0.5, 1.5, Chart::vertical}}, g);
    const auto dir = std::filesystem::temp_directory_path() / "shearscope_frames_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "w.json").string();
    save_window(path, w);
    const auto back = load_window(path);
    EXPECT_EQ(back.provenance, "tight");
    EXPECT_EQ(back.w_hat_sq, w.w_hat_sq);
    EXPECT_EQ(back.params.xi, 3.0);
    EXPECT_EQ(back.params.cone.orientation, Chart::vertical);
    EXPECT_THROW(params_from_json(nlohmann::json{{"gamma", -1}, {"xi", 2}, {"cone", {{"u", 1}, {"v", 1}}}}), ConfigError);
    std::filesystem::remove_all(dir);
}
