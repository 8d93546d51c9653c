// shearscope command-line tool.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include <shearscope/admissibility.hpp>
#include <shearscope/config.hpp>
#include <shearscope/frames.hpp>
#include <shearscope/generators.hpp>
#include <shearscope/grid.hpp>
#include <shearscope/parallel.hpp>
#include <shearscope/radon.hpp>
#include <shearscope/wavefront.hpp>
#include <shearscope/xform.hpp>

using namespace shearscope;
using nlohmann::json;

namespace {

void emit(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in '" + path + "': " + e.what());
    }
}

int fail(ErrorKind kind, const std::string& message) {
    json j{{"error", {{"kind", Error(kind, "").kind_name()}, {"code", static_cast<int>(kind)}, {"message", message}}}};
    std::cerr << j.dump() << '\n';
    return static_cast<int>(kind);
}

GridMeta centered_grid(int n, double h) { return {n, n, h, -n * h / 2, -n * h / 2}; }

std::vector<double> scale_grid_or_default(const std::optional<double>& a_min, double a_max, int per_octave,
                                          const GridMeta& g) {
    return make_scale_grid(a_min.value_or(4 * g.spacing * g.spacing), a_max, per_octave);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous shearlet transform, frame certification and wavefront estimation"};
    app.require_subcommand(1);
    std::optional<int> threads;
    app.add_option("--threads", threads, "worker threads (0: SHEARSCOPE_THREADS or hardware)");

    RawConfig raw;
    std::string gen, field_path, params_path, window_path, out_path;
    std::optional<double> a_min, a_max, s_step, slope;
    int per_octave = 8, resolution = 33, max_moment = 4, csv_stride = 1;
    std::optional<std::string> like;
    bool discrete = false;

    auto add_cone = [&](CLI::App* c) {
        c->add_option("--u", raw.u, "cone low-frequency cutoff (>= 0, default 1)");
        c->add_option("--v", raw.v, "cone slope bound (> 0, default 1)");
        c->add_option("--orientation", raw.orientation, "horizontal or vertical");
    };
    auto add_grid = [&](CLI::App* c) {
        c->add_option("--n", raw.n, "grid nodes per axis (even, >= 8, default 128)");
        c->add_option("--spacing", raw.spacing, "grid spacing (> 0, default 1/16)");
    };

    auto* analyze = app.add_subcommand("analyze", "admissibility report for a generator");
    analyze->add_option("gen", gen, "dog:<n>, tensor:<M> or classical")->required();
    analyze->add_option("--max-moment", max_moment, "largest moment order to tabulate");
    analyze->add_option("-o,--output", out_path, "JSON output (default stdout)");

    auto* transform = app.add_subcommand("transform", "shearlet coefficients as a CV1 volume");
    transform->add_option("field", field_path)->required();
    transform->add_option("gen", gen)->required();
    transform->add_option("-o,--output", out_path, "CV1 output")->required();
    transform->add_option("--gamma", raw.gamma, "largest scale (default 1)");
    transform->add_option("--xi", raw.xi, "shear range (default 2)");
    transform->add_option("--a-min", a_min, "smallest scale (default 4*spacing^2)");
    transform->add_option("--per-octave", per_octave, "scales per octave");
    transform->add_option("--s-step", s_step, "shear step (default 1/8)");
    transform->add_option("--chart", raw.orientation, "horizontal or vertical (dual system)");

    auto* frame_check = app.add_subcommand("frame-check", "frame bounds of a truncated cone system");
    frame_check->add_option("gen", gen)->required();
    frame_check->add_option("--gamma", raw.gamma, "scale ceiling (> 0, default 1)");
    frame_check->add_option("--xi", raw.xi, "shear ceiling (> 0, default 2)");
    add_cone(frame_check);
    frame_check->add_option("--resolution", resolution, "log-spaced radii");
    frame_check->add_option("-o,--output", out_path);

    auto* auto_trunc = app.add_subcommand("auto-truncate", "choose (gamma, xi) for a given slack");
    auto_trunc->add_option("gen", gen)->required();
    auto_trunc->add_option("--slack", raw.slack, "relative tail budget in (0, 1)")->required();
    add_cone(auto_trunc);
    auto_trunc->add_option("-o,--output", out_path);

    auto* tight = app.add_subcommand("tight-window", "window completing the system to a tight frame");
    tight->add_option("gen", gen)->required();
    tight->add_option("params", params_path)->required();
    tight->add_option("-o,--output", out_path, "window JSON; payload written next to it")->required();
    tight->add_option("--like", like, "take the frequency grid from this SF2D field");
    add_grid(tight);

    auto* recon = app.add_subcommand("reconstruct", "reconstruct a cone-projected field");
    recon->add_option("field", field_path)->required();
    recon->add_option("gen", gen)->required();
    recon->add_option("params", params_path)->required();
    recon->add_option("--window", window_path, "window JSON (default: zero window)");
    recon->add_flag("--discrete", discrete, "synthesize from coefficient planes on the default (a, s) grid");
    recon->add_option("-o,--output", out_path, "reconstructed SF2D")->required();

    auto* rad = app.add_subcommand("radon", "sheared Radon profile as CSV");
    rad->add_option("field", field_path)->required();
    rad->add_option("--slope", slope, "shear slope s")->required();
    rad->add_option("-o,--output", out_path, "CSV output")->required();

    auto* slice = app.add_subcommand("slice-check", "projection-slice error of the Radon path");
    slice->add_option("field", field_path)->required();
    slice->add_option("--slope", slope, "shear slope s")->required();
    slice->add_option("-o,--output", out_path);

    auto* wave = app.add_subcommand("wavefront", "D1/D2 wavefront map as CSV and PGM");
    wave->add_option("field", field_path)->required();
    wave->add_option("gen", gen)->required();
    wave->add_option("-o,--output", out_path, "output prefix (<prefix>.csv, <prefix>.pgm)")->required();
    wave->add_option("--threshold", raw.threshold, "decay exponent counted as rapid (> 0, default 2)");
    wave->add_option("--a-min", a_min, "smallest fit scale (default 6*spacing)");
    wave->add_option("--a-max", a_max, "largest fit scale (default 12*spacing)");
    wave->add_option("--per-octave", per_octave, "fit scales per octave");
    wave->add_option("--s-step", s_step, "shear step (default 1/16)");
    wave->add_option("--csv-stride", csv_stride, "write every k-th t node");

    auto* synth = app.add_subcommand("synth", "synthetic test fields");
    synth->require_subcommand(1);
    LineSingularity ls;
    ls.width = 0;
    double sigma = 1, lo = 1, hi = 4;
    unsigned seed = 1;
    auto* s_line = synth->add_subcommand("line", "rasterized line singularity");
    s_line->add_option("--s0", ls.s0, "line slope (x1 + s0 x2 = u0)");
    s_line->add_option("--u0", ls.u0, "line offset");
    s_line->add_option("--width", ls.width, "ridge width (default 2*spacing)");
    s_line->add_option("--phi-radius", ls.radius, "cutoff radius (<= 0: no cutoff)");
    s_line->add_option("--phi-center1", ls.center1);
    s_line->add_option("--phi-center2", ls.center2);
    auto* s_gauss = synth->add_subcommand("gaussian", "Gaussian bump exp(-pi |x|^2 / sigma^2)");
    s_gauss->add_option("--sigma", sigma);
    auto* s_cone = synth->add_subcommand("cone", "random real field band-limited to the horizontal cone (1, 1)");
    s_cone->add_option("--seed", seed);
    s_cone->add_option("--lo", lo, "smallest |xi|");
    s_cone->add_option("--hi", hi, "largest |xi|");
    for (auto* c : {s_line, s_gauss, s_cone}) {
        add_grid(c);
        c->add_option("-o,--output", out_path, "SF2D output")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(ErrorKind::config, e.what());
    }

    try {
        if (threads) raw.threads = threads;
        const RunConfig cfg = validate_config(raw);
        if (raw.threads) set_threads(cfg.threads);

        if (analyze->parsed()) {
            emit(to_json(analyze_generator(parse_generator(gen), max_moment)), out_path);
        } else if (transform->parsed()) {
            const auto f = load_sf2d(field_path);
            const auto spec = parse_generator(gen);
            const auto a = scale_grid_or_default(a_min, cfg.params.gamma, per_octave, f.meta);
            const auto s = make_shear_grid(cfg.params.xi, s_step.value_or(1.0 / 8));
            const auto vol = shearlet_transform(f, spec, a, s, cfg.params.cone.orientation);
            save_cv1(out_path, vol);
            emit({{"output", out_path}, {"scales", a.size()}, {"shears", s.size()}, {"warnings", vol.warnings}}, "");
        } else if (frame_check->parsed()) {
            const auto spec = parse_generator(gen);
            const DeltaQuadrature q(spec);
            emit(to_json(frame_bounds(spec, q, cfg.params, resolution)), out_path);
        } else if (auto_trunc->parsed()) {
            const auto spec = parse_generator(gen);
            const DeltaQuadrature q(spec);
            const auto res = select_truncation(spec, q, frame_constant(spec), cfg.params.cone, cfg.slack);
            emit(to_json(res), out_path);
        } else if (tight->parsed()) {
            const auto spec = parse_generator(gen);
            const auto p = params_from_json(load_json(params_path));
            const GridMeta g = like ? load_sf2d(*like).meta : centered_grid(cfg.n, cfg.spacing);
            validate_meta(g);
            const DeltaQuadrature q(spec);
            const auto w = synthesize_tight_window(spec, q, frame_constant(spec), p, g);
            save_window(out_path, w);
            emit({{"output", out_path}, {"provenance", w.provenance}, {"max_clamp", w.max_clamp}}, "");
        } else if (recon->parsed()) {
            const auto f = load_sf2d(field_path);
            const auto spec = parse_generator(gen);
            const auto p = params_from_json(load_json(params_path));
            const auto w = window_path.empty() ? zero_window(f.meta) : load_window(window_path);
            const auto c = frame_constant(spec);
            SampledField2D rec;
            if (discrete) {
                const auto a = make_scale_grid(4 * f.meta.spacing * f.meta.spacing, p.gamma, 8);
                const auto s = make_shear_grid(p.xi, 1.0 / 8);
                rec = reconstruct_cone_discrete(f, spec, c, p, w, a, s);
            } else {
                rec = reconstruct_cone(f, DeltaQuadrature(spec), c, p, w);
            }
            save_sf2d(out_path, rec);
            const auto target = cone_project(f, p.cone);
            emit({{"output", out_path},
                  {"path", discrete ? "discrete-synthesis" : "multiplier"},
                  {"window", w.provenance},
                  {"relative_l2_error", relative_l2(rec, target)}},
                 "");
        } else if (rad->parsed()) {
            save_profile_csv(out_path, radon(load_sf2d(field_path), *slope));
        } else if (slice->parsed()) {
            const auto r = projection_slice_check(load_sf2d(field_path), *slope);
            emit({{"slope", r.slope}, {"error", r.max_error}, {"band", r.band}, {"frequencies", r.compared}}, out_path);
        } else if (wave->parsed()) {
            const auto f = load_sf2d(field_path);
            const auto spec = parse_generator(gen);
            auto o = default_wavefront_options(f.meta);
            o.threshold = cfg.threshold;
            if (a_min || a_max)
                o.a_grid = make_scale_grid(a_min.value_or(6 * f.meta.spacing), a_max.value_or(12 * f.meta.spacing),
                                           per_octave);
            if (s_step) o.s_grid = make_shear_grid(1.0, *s_step);
            const auto m = wavefront_map(f, spec, o);
            {
                std::ofstream os(out_path + ".csv");
                if (!os) throw IoError("cannot open '" + out_path + ".csv' for writing");
                write_wavefront_csv(os, m, csv_stride);
            }
            {
                std::ofstream os(out_path + ".pgm", std::ios::binary);
                if (!os) throw IoError("cannot open '" + out_path + ".pgm' for writing");
                write_wavefront_pgm(os, m);
            }
            emit(to_json(m), "");
        } else if (synth->parsed()) {
            const GridMeta g = centered_grid(cfg.n, cfg.spacing);
            validate_meta(g);
            json info{{"output", out_path}};
            if (s_line->parsed()) {
                if (ls.width == 0) ls.width = 2 * g.spacing;
                auto lf = make_line_singularity(ls, g);
                save_sf2d(out_path, lf.field);
                info["warnings"] = lf.warnings;
            } else if (s_gauss->parsed()) {
                if (!(sigma > 0)) throw ConfigError("--sigma must be > 0");
                save_sf2d(out_path, sample_field(g, [&](double x1, double x2) {
                              return std::exp(-std::numbers::pi * (x1 * x1 + x2 * x2) / (sigma * sigma));
                          }));
            } else {
                if (!(lo >= 0) || !(hi > lo)) throw ConfigError("--lo/--hi must satisfy 0 <= lo < hi");
                std::mt19937_64 rng(seed);
                std::normal_distribution<double> nd;
                Spectrum2D F(g);
                for (int k1 = 0; k1 < g.n1; ++k1)
                    for (int k2 = 0; k2 < g.n2; ++k2) {
                        const double x1 = g.xi1(k1), x2 = g.xi2(k2), r = std::hypot(x1, x2);
                        if (r >= lo && r <= hi && in_horizontal_cone(x1, x2, 1, 1)) F.at(k1, k2) = {nd(rng), nd(rng)};
                    }
                auto f = dft_inverse(F, false);
                for (auto& v : f.values) v = v.real();
                f.is_complex = false;
                save_sf2d(out_path, cone_project(f, ConeSpec{}));
            }
            emit(info, "");
        }
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(ErrorKind::numerical, e.what());
    }
    return 0;
}
