// spincoh command-line front end: simulation, spectral analysis, fitting and
// band-bending pipelines driven by a single JSON config.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spincoh/bandbend.hpp"
#include "spincoh/bathsim.hpp"
#include "spincoh/extract.hpp"
#include "spincoh/filterfn.hpp"
#include "spincoh/fitkit.hpp"
#include "spincoh/io.hpp"
#include "spincoh/log.hpp"
#include "spincoh/quadrature.hpp"
#include "spincoh/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spincoh;

namespace {

// exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Ctx {
    json config;
    std::string config_path;
    fs::path out_dir;
    std::uint64_t seed = 1;
    bool verbose = false;
    io::Provenance prov;
    std::vector<std::string> outputs;

    fs::path out(const std::string& name) const { return out_dir / name; }
    void note(const fs::path& p) { outputs.push_back(p.filename().string()); }
    void log(const std::string& msg) const {
        if (verbose) std::cerr << "[spincoh] " << msg << "\n";
    }
};

const json& section(const Ctx& ctx, const std::string& name) {
    if (!ctx.config.contains(name))
        throw UsageError("config has no '" + name + "' section");
    return ctx.config.at(name);
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

template <class T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw UsageError("missing '" + key + "' in " + where);
    return j.at(key).get<T>();
}

std::vector<double> parse_time_grid(const json& j, const std::string& where) {
    if (!j.contains("times")) throw UsageError("missing 'times' in " + where);
    const json& t = j.at("times");
    if (t.is_array()) return t.get<std::vector<double>>();
    const double lo = require<double>(t, "min", where + ".times");
    const double hi = require<double>(t, "max", where + ".times");
    const int count = require<int>(t, "count", where + ".times");
    const bool log_spaced = get_or(t, "log", true);
    if (count < 1 || lo <= 0.0 || hi <= lo)
        throw UsageError("invalid time grid in " + where);
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : double(i) / (count - 1);
        out.push_back(log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
    }
    return out;
}

Normalization parse_normalization(const json& j) {
    Normalization n;
    if (!j.contains("normalization")) return n;
    const json& nj = j.at("normalization");
    const std::string mode = get_or<std::string>(nj, "mode", "identity");
    if (mode == "identity") {
        n.mode = Normalization::Mode::Identity;
    } else if (mode == "minmax") {
        n.mode = Normalization::Mode::MinMax;
    } else if (mode == "affine") {
        n.mode = Normalization::Mode::Affine;
        n.baseline = require<double>(nj, "baseline", "normalization");
        n.amplitude = require<double>(nj, "amplitude", "normalization");
    } else {
        throw UsageError("unknown normalization mode '" + mode + "'");
    }
    return n;
}

json manifest_base(const Ctx& ctx, const std::string& subcommand) {
    return json{{"subcommand", subcommand},
                {"provenance", io::provenance_json(ctx.prov)},
                {"config_echo", ctx.config},
                {"seed", ctx.seed}};
}

void write_manifest(Ctx& ctx, json manifest) {
    manifest["outputs"] = ctx.outputs;
    io::write_file(ctx.out("manifest.json").string(), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int run_simulate(Ctx& ctx) {
    const json& sim = section(ctx, "simulate");
    const std::string kind = require<std::string>(sim, "kind", "simulate");
    json manifest = manifest_base(ctx, "simulate");

    if (kind == "ou") {
        const json& ou = section(ctx, "simulate").at("ou");
        std::vector<OUParams> components;
        if (ou.contains("spectrum")) {
            // spectrum-form input: Lorentzians map to OU components directly,
            // a 1/f^a term is realized as a Lorentzian comb over a band
            const NoiseSpectrum spec = io::spectrum_from_json(ou.at("spectrum"));
            if (spec.white_floor > 0.0)
                throw UsageError(
                    "simulate.ou.spectrum: a white floor has no OU realization; "
                    "remove it or list explicit components");
            std::vector<LorentzianComponent> lors = spec.lorentzians;
            if (spec.one_over_f && spec.one_over_f->delta_e > 0.0) {
                const double wlo = get_or(ou, "comb_omega_min", 2 * 3.14159265358979e5);
                const double whi = get_or(ou, "comb_omega_max", 2 * 3.14159265358979e9);
                const auto comb = lorentzian_comb_for_power_law(
                    *spec.one_over_f, wlo, whi, get_or(ou, "comb_per_decade", 3));
                lors.insert(lors.end(), comb.begin(), comb.end());
            }
            for (const auto& l : lors)
                components.push_back(ou_params_for(l, l.tau_c / 20.0, 0));
        } else {
            for (const auto& cj : require<json>(ou, "components", "simulate.ou")) {
                OUParams p;
                p.delta = require<double>(cj, "delta", "ou component");
                p.tau_c = require<double>(cj, "tau_c", "ou component");
                p.dt = get_or(cj, "dt", p.tau_c / 20.0);
                components.push_back(p);
            }
        }
        const std::string mode_s = get_or<std::string>(ou, "mode", "zero-width");
        PulseDephasingMode mode;
        if (mode_s == "zero-width")
            mode = PulseDephasingMode::ZeroWidth;
        else if (mode_s == "frozen-during-pulse")
            mode = PulseDephasingMode::FrozenDuringPulse;
        else if (mode_s == "accumulate-during-pulse")
            mode = PulseDephasingMode::AccumulateDuringPulse;
        else
            throw UsageError("unknown pulse mode '" + mode_s + "'");
        const auto n_list = require<std::vector<int>>(ou, "n_pulses", "simulate.ou");
        const double t_pi = get_or(ou, "t_pi", 0.0);
        const int n_shots = get_or(ou, "n_shots", 10000);
        const auto times = parse_time_grid(ou, "simulate.ou");

        for (int np : n_list) {
            const auto trace = simulate_coherence_curve(
                components, np, t_pi, times, mode, n_shots,
                rng::mix(ctx.seed, 0x51, std::uint64_t(np)), get_or(ou, "n_threads", 0));
            const auto path = ctx.out("trace_ou_N" + std::to_string(np) + ".csv");
            io::write_sim_trace_csv(path.string(), trace, ctx.prov);
            ctx.note(path);
            ctx.log("wrote " + path.string());
        }
    } else if (kind == "dipolar") {
        const json& dj = section(ctx, "simulate").at("dipolar");
        DipolarBathConfig cfg;
        cfg.dimensionality = get_or(dj, "dimensionality", 3);
        cfg.interaction_exponent = get_or(dj, "interaction_exponent", 3);
        cfg.spin_density = get_or(dj, "spin_density", 0.0);
        cfg.flip_rate = require<double>(dj, "flip_rate", "simulate.dipolar");
        cfg.coupling_prefactor = require<double>(dj, "coupling_prefactor", "simulate.dipolar");
        cfg.exclusion_radius = require<double>(dj, "exclusion_radius", "simulate.dipolar");
        cfg.region_size = require<double>(dj, "region_size", "simulate.dipolar");
        cfg.n_spins = get_or(dj, "n_spins", 0);
        const std::string hop = get_or<std::string>(dj, "hopping", "none");
        if (hop == "none")
            cfg.hopping = HoppingMode::None;
        else if (hop == "resample-per-shot")
            cfg.hopping = HoppingMode::ResamplePerShot;
        else
            throw UsageError("unknown hopping mode '" + hop + "'");
        cfg.seed = ctx.seed;
        const auto times = parse_time_grid(dj, "simulate.dipolar");
        const int n_real = get_or(dj, "n_realizations", 2000);

        const auto curve = dipolar_echo_ensemble(cfg, times, n_real);
        const auto path = ctx.out("dipolar_chi.csv");
        io::write_chi_csv(path.string(), curve, ctx.prov);
        ctx.note(path);
    } else {
        throw UsageError("simulate.kind must be 'ou' or 'dipolar'");
    }
    write_manifest(ctx, manifest);
    return 0;
}

int run_analyze(Ctx& ctx) {
    const json& an = section(ctx, "analyze");
    if (!an.contains("traces") || an.at("traces").empty())
        throw UsageError("analyze.traces is empty: nothing to analyze");

    // ingest traces + metadata (all listed metadata must be present)
    std::vector<CoherenceTrace> traces;
    std::vector<Normalization> norms;
    std::vector<std::string> missing;
    for (const auto& tj : an.at("traces")) {
        if (!tj.contains("file") || !tj.contains("n_pulses")) {
            missing.push_back(tj.dump());
            continue;
        }
        CoherenceTrace tr;
        try {
            tr = io::read_trace_csv(tj.at("file").get<std::string>());
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
        tr.n_pulses = tj.at("n_pulses").get<int>();
        tr.t_pi = get_or(tj, "t_pi", 0.0);
        tr.source = get_or<std::string>(tj, "source", tj.at("file").get<std::string>());
        traces.push_back(tr);
        norms.push_back(parse_normalization(tj));
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& s : missing) joined += "\n  " + s;
        throw DataError("traces missing file/n_pulses metadata:" + joined);
    }

    json manifest = manifest_base(ctx, "analyze");

    std::vector<CoherenceTrace> normalized;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        try {
            normalized.push_back(normalize_trace(traces[i], norms[i]));
        } catch (const std::exception& e) {
            throw DataError("normalizing '" + traces[i].source + "': " + e.what());
        }
    }

    // spectral decomposition
    const int min_pulses = get_or(an, "min_pulses", 64);
    const int n_bins = get_or(an, "n_bins", 14);
    BinnedSpectrum binned;
    try {
        const auto points = extract_spectrum(normalized, min_pulses);
        binned = log_bin(points, n_bins);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }

    std::vector<SpectrumPoint> extra;
    std::optional<DqAnchor> anchor;
    if (an.contains("dq_anchor")) {
        OverviewAnchors oa;
        oa.gamma_dq = require<double>(an.at("dq_anchor"), "gamma", "analyze.dq_anchor");
        oa.omega_dq = get_or(an.at("dq_anchor"), "omega_dq", oa.omega_dq);
        if (an.contains("sq_anchor")) {
            oa.omega_sq_rate = require<double>(an.at("sq_anchor"), "omega_rate", "analyze.sq_anchor");
            oa.omega_sq = get_or(an.at("sq_anchor"), "omega_sq", oa.omega_sq);
        }
        extra = assemble_overview(BinnedSpectrum{}, oa);
        anchor = DqAnchor{oa.gamma_dq, oa.omega_dq};
    }
    const auto spec_path = ctx.out("spectrum.csv");
    io::write_spectrum_csv(spec_path.string(), binned, extra, ctx.prov);
    ctx.note(spec_path);

    // noise-model fit
    if (an.contains("noise_fit")) {
        if (!anchor) throw UsageError("analyze.noise_fit requires analyze.dq_anchor");
        const json& nf = an.at("noise_fit");
        NoiseFitResult fit;
        try {
            fit = fit_noise_model(binned, *anchor, get_or(nf, "n_lorentzians", 2),
                                  get_or(nf, "white", false));
        } catch (const std::exception& e) {
            throw NumericalError(std::string("fit_noise_model: ") + e.what());
        }
        json fj{{"provenance", io::provenance_json(ctx.prov)},
                {"r2", fit.r2},
                {"failed", fit.failed},
                {"exponent_a", fit.exponent_a},
                {"delta_e", fit.delta_e},
                {"white_floor", fit.spectrum.white_floor},
                {"spectrum", io::spectrum_to_json(fit.spectrum)}};
        fj["lorentzians"] = json::array();
        for (std::size_t k = 0; k < fit.spectrum.lorentzians.size(); ++k) {
            fj["lorentzians"].push_back(
                {{"delta", fit.spectrum.lorentzians[k].delta},
                 {"tau_c", fit.spectrum.lorentzians[k].tau_c},
                 {"tau_c_is_upper_bound", bool(fit.tau_upper_bound[k])}});
        }
        const auto p = ctx.out("noise_fit.json");
        io::write_file(p.string(), fj.dump(2) + "\n");
        ctx.note(p);
    }

    // per-trace stretched-exponential fits
    {
        json fits = json::array();
        for (const auto& tr : normalized) {
            try {
                const auto f = fit_stretched_exp(tr);
                fits.push_back({{"source", tr.source},
                                {"n_pulses", tr.n_pulses},
                                {"amplitude", f.amplitude},
                                {"t2_s", f.t2},
                                {"stretch_n", f.stretch_n},
                                {"t0_s", f.t0},
                                {"residual_norm", f.residual_norm},
                                {"r2", f.r2}});
            } catch (const std::exception& e) {
                fits.push_back({{"source", tr.source}, {"error", e.what()}});
            }
        }
        json out{{"provenance", io::provenance_json(ctx.prov)}, {"fits", fits}};
        const auto p = ctx.out("stretched_fits.json");
        io::write_file(p.string(), out.dump(2) + "\n");
        ctx.note(p);
    }

    // echo classification (needs tau_c)
    if (an.contains("classify")) {
        const double tau_c = require<double>(an.at("classify"), "tau_c", "analyze.classify");
        json cls = json::array();
        for (const auto& tr : normalized) {
            if (tr.n_pulses != 1) continue;
            ChiCurve curve;
            curve.n_pulses = 1;
            for (std::size_t i = 0; i < tr.c.size(); ++i) {
                if (tr.c[i] > 0.0 && tr.c[i] < 1.0) {
                    curve.time_s.push_back(tr.time_s[i]);
                    curve.chi.push_back(-std::log(tr.c[i]));
                }
            }
            const auto b = classify_bath(curve, tau_c);
            const char* verdict = b.verdict == BathVerdict::FixedMarkovian
                                      ? "fixed-Markovian"
                                      : (b.verdict == BathVerdict::ConfigurationalAveraging
                                             ? "configurational-averaging"
                                             : "indeterminate");
            json cj{{"source", tr.source},
                    {"n_rw", b.n_rw},
                    {"n_rw_stderr", b.n_rw_stderr},
                    {"verdict", verdict},
                    {"reason", b.reason}};
            if (b.n_ballistic) cj["n_ballistic"] = *b.n_ballistic;
            cj["candidates"] = json::array();
            for (const auto& [d, a] : b.candidates)
                cj["candidates"].push_back({{"D", d}, {"alpha", a}});
            cls.push_back(cj);
        }
        json out{{"provenance", io::provenance_json(ctx.prov)}, {"classifications", cls}};
        const auto p = ctx.out("classification.json");
        io::write_file(p.string(), out.dump(2) + "\n");
        ctx.note(p);
    }

    write_manifest(ctx, manifest);
    return 0;
}

int run_fit_t1(Ctx& ctx) {
    const json& ft = section(ctx, "fit_t1");
    RelaxationTrace sq, dq;
    try {
        auto [ts, ys] = io::read_xy_csv(require<std::string>(ft, "sq_file", "fit_t1"));
        sq = {ts, ys};
        auto [td, yd] = io::read_xy_csv(require<std::string>(ft, "dq_file", "fit_t1"));
        dq = {td, yd};
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    RatePair rp;
    try {
        rp = fit_rate_equations(sq, dq);
    } catch (const std::exception& e) {
        throw NumericalError(e.what());
    }
    json out{{"provenance", io::provenance_json(ctx.prov)},
             {"omega_sq_rate", rp.omega_sq_rate},
             {"gamma_dq_rate", rp.gamma_dq_rate},
             {"t1_sq_s", rp.t1_sq},
             {"t1_dq_s", rp.t1_dq},
             {"gamma_negative_flag", rp.gamma_negative_flag}};
    const auto p = ctx.out("t1_fit.json");
    io::write_file(p.string(), out.dump(2) + "\n");
    ctx.note(p);
    write_manifest(ctx, manifest_base(ctx, "fit-t1"));
    return 0;
}

int run_classify(Ctx& ctx) {
    const json& cj = section(ctx, "classify");
    const double tau_c = require<double>(cj, "tau_c", "classify");
    ChiCurve curve;
    try {
        if (cj.contains("chi_file")) {
            curve = io::read_chi_csv(cj.at("chi_file").get<std::string>());
        } else if (cj.contains("coherence_file")) {
            const auto tr = io::read_trace_csv(cj.at("coherence_file").get<std::string>());
            for (std::size_t i = 0; i < tr.c.size(); ++i)
                if (tr.c[i] > 0.0 && tr.c[i] < 1.0) {
                    curve.time_s.push_back(tr.time_s[i]);
                    curve.chi.push_back(-std::log(tr.c[i]));
                }
        } else {
            throw UsageError("classify needs chi_file or coherence_file");
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    const auto b = classify_bath(curve, tau_c);
    const char* verdict = b.verdict == BathVerdict::FixedMarkovian
                              ? "fixed-Markovian"
                              : (b.verdict == BathVerdict::ConfigurationalAveraging
                                     ? "configurational-averaging"
                                     : "indeterminate");
    json out{{"provenance", io::provenance_json(ctx.prov)},
             {"n_rw", b.n_rw},
             {"n_rw_stderr", b.n_rw_stderr},
             {"verdict", verdict},
             {"reason", b.reason}};
    if (b.n_ballistic) out["n_ballistic"] = *b.n_ballistic;
    out["candidates"] = json::array();
    for (const auto& [d, a] : b.candidates)
        out["candidates"].push_back({{"D", d}, {"alpha", a}});
    const auto p = ctx.out("classification.json");
    io::write_file(p.string(), out.dump(2) + "\n");
    ctx.note(p);
    write_manifest(ctx, manifest_base(ctx, "classify"));
    return 0;
}

int run_bandbend(Ctx& ctx) {
    const json& bj = section(ctx, "bandbend");
    BandConfig cfg;
    const std::string preset = get_or<std::string>(bj, "preset", "");
    if (preset == "core-shell")
        cfg = BandConfig::coreshell_default();
    else if (preset == "bare")
        cfg = BandConfig::bare_default();
    else if (preset == "flat") {
        cfg = BandConfig::coreshell_default();
        cfg.surface_bending_ev = 0.0;
    } else if (!preset.empty()) {
        throw UsageError("unknown bandbend preset '" + preset + "'");
    }
    if (bj.contains("core_radius_nm")) cfg.core_radius_nm = bj.at("core_radius_nm").get<double>();
    if (bj.contains("surface_bending_ev"))
        cfg.surface_bending_ev = bj.at("surface_bending_ev").get<double>();
    if (bj.contains("grid_points")) cfg.grid_points = bj.at("grid_points").get<int>();
    if (bj.contains("material")) {
        const json& mj = bj.at("material");
        cfg.material.band_gap = get_or(mj, "band_gap", cfg.material.band_gap);
        cfg.material.ec_below_vacuum = get_or(mj, "ec_below_vacuum", cfg.material.ec_below_vacuum);
        cfg.material.rel_permittivity =
            get_or(mj, "rel_permittivity", cfg.material.rel_permittivity);
        cfg.material.temperature = get_or(mj, "temperature", cfg.material.temperature);
    }
    if (bj.contains("defects")) {
        cfg.defects.clear();
        for (const auto& dj : bj.at("defects")) {
            DefectLevel d;
            d.name = require<std::string>(dj, "name", "defect");
            d.density = require<double>(dj, "density_cm3", "defect");
            d.level_ev = require<double>(dj, "level_ev", "defect");
            d.relative_to_conduction = get_or(dj, "relative_to_conduction", true);
            d.kind = get_or<std::string>(dj, "kind", "donor") == "acceptor"
                         ? DefectKind::Acceptor
                         : DefectKind::Donor;
            d.degeneracy = get_or(dj, "degeneracy", d.kind == DefectKind::Donor ? 2.0 : 4.0);
            cfg.defects.push_back(d);
        }
    }

    BandProfile prof;
    try {
        prof = solve_poisson(cfg);
    } catch (const std::exception& e) {
        throw NumericalError(e.what());
    }
    const auto prof_path = ctx.out("profile.csv");
    io::write_band_profile_csv(prof_path.string(), prof, ctx.prov);
    ctx.note(prof_path);

    const double threshold = get_or(bj, "depletion_threshold", 0.5);
    const std::string p1 = get_or<std::string>(bj, "p1_name", "P1");
    const std::string nv = get_or<std::string>(bj, "nv_name", "NV");
    const auto rep = p1_depletion_report(prof, p1, threshold);
    // threshold sensitivity alongside the headline number
    json sens = json::object();
    for (double thr : {0.25, 0.5, 0.75})
        sens[io::format_double(thr)] = p1_depletion_report(prof, p1, thr).width_nm;
    json out{{"provenance", io::provenance_json(ctx.prov)},
             {"depletion_width_nm", rep.width_nm},
             {"depletion_threshold", rep.threshold},
             {"width_vs_threshold_nm", sens},
             {"neutral_p1_reduction", rep.fraction_reduced},
             {"nv_minus_relative_change", nv_stability_report(prof, nv)},
             {"fermi_level_ev", prof.fermi_level_ev},
             {"gauss_closure", prof.gauss_closure},
             {"poisson_residual", prof.residual_norm},
             {"newton_iterations", prof.newton_iterations}};
    const auto p = ctx.out("report.json");
    io::write_file(p.string(), out.dump(2) + "\n");
    ctx.note(p);
    write_manifest(ctx, manifest_base(ctx, "bandbend"));
    return 0;
}

int run_unmix(Ctx& ctx) {
    const json& uj = section(ctx, "unmix");
    std::vector<double> m, r0, rm;
    try {
        auto [wl1, v1] = io::read_xy_csv(require<std::string>(uj, "measured", "unmix"));
        auto [wl2, v2] = io::read_xy_csv(require<std::string>(uj, "ref_nv0", "unmix"));
        auto [wl3, v3] = io::read_xy_csv(require<std::string>(uj, "ref_nvm", "unmix"));
        m = v1;
        r0 = v2;
        rm = v3;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    UnmixResult res;
    try {
        res = unmix_pl(m, r0, rm);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    json out{{"provenance", io::provenance_json(ctx.prov)},
             {"a_nv0_weight", res.a},
             {"nv_minus_fraction", res.nv_minus_fraction}};
    const auto p = ctx.out("unmix.json");
    io::write_file(p.string(), out.dump(2) + "\n");
    ctx.note(p);
    write_manifest(ctx, manifest_base(ctx, "unmix"));
    return 0;
}

int run_deer(Ctx& ctx) {
    const json& dj = section(ctx, "deer");
    std::vector<std::vector<double>> cols;
    try {
        cols = io::read_columns_csv(require<std::string>(dj, "file", "deer"), 5);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    const auto& t = cols[0];
    std::vector<DeerSignals> sig;
    try {
        sig = deer_signal_series(cols[1], cols[2], cols[3], cols[4]);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }

    std::ostringstream s;
    s << io::provenance_comment(ctx.prov);
    s << "t_s,s_d,s_e,s_fid\n";
    for (std::size_t i = 0; i < sig.size(); ++i)
        s << io::format_double(t[i]) << "," << io::format_double(sig[i].s_d) << ","
          << io::format_double(sig[i].s_e) << "," << io::format_double(sig[i].s_fid) << "\n";
    const auto csv_path = ctx.out("deer_signals.csv");
    io::write_file(csv_path.string(), s.str());
    ctx.note(csv_path);

    json out{{"provenance", io::provenance_json(ctx.prov)}};
    if (get_or(dj, "fit_fid", true)) {
        std::vector<double> fid;
        for (const auto& x : sig) fid.push_back(x.s_fid);
        try {
            const auto f = fit_exp_decay(t, fid);
            out["fid_time_s"] = 1.0 / f.rate;
            out["fid_rate"] = f.rate;
            out["fid_amplitude"] = f.amplitude;
            out["fid_r2"] = f.r2;
        } catch (const std::exception& e) {
            out["fid_fit_error"] = e.what();
        }
    }
    const auto p = ctx.out("deer_fit.json");
    io::write_file(p.string(), out.dump(2) + "\n");
    ctx.note(p);
    write_manifest(ctx, manifest_base(ctx, "deer"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spincoh: spin-qubit decoherence analysis toolkit"};
    app.fallthrough();
    app.set_version_flag("--version", spincoh::version);
    std::string config_path, out_dir = ".";
    std::uint64_t seed_flag = 0;
    bool seed_set = false, verbose = false;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory (created if absent)");
    app.add_option("--seed", seed_flag, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--verbose", verbose, "log progress to stderr");
    app.require_subcommand(1);

    int (*runner)(Ctx&) = nullptr;
    app.add_subcommand("simulate", "Monte Carlo bath simulation -> trace CSVs")
        ->callback([&] { runner = run_simulate; });
    app.add_subcommand("analyze", "traces -> spectrum, noise fit, stretched fits")
        ->callback([&] { runner = run_analyze; });
    app.add_subcommand("fit-t1", "SQ/DQ relaxation -> (Omega, gamma) rates")
        ->callback([&] { runner = run_fit_t1; });
    app.add_subcommand("classify", "echo chi curve -> bath classification")
        ->callback([&] { runner = run_classify; });
    app.add_subcommand("bandbend", "spherical Poisson solve -> profile + depletion report")
        ->callback([&] { runner = run_bandbend; });
    app.add_subcommand("unmix", "PL spectrum -> NV- fraction")
        ->callback([&] { runner = run_unmix; });
    app.add_subcommand("deer", "DEER photon rates -> S_D, S_E, S_FID")
        ->callback([&] { runner = run_deer; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return 1;  // usage error
    }

    Ctx ctx;
    try {
        ctx.config_path = config_path;
        const std::string raw = io::read_file(config_path);
        ctx.config = json::parse(raw);
        const int schema = ctx.config.value("schema_version", 1);
        if (schema != 1) throw UsageError("unsupported schema_version");
        ctx.out_dir = out_dir;
        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        ctx.seed = seed_set ? seed_flag : ctx.config.value("seed", std::uint64_t(1));
        ctx.verbose = verbose;
        ctx.prov = io::Provenance{spincoh::version, io::fnv1a_hex(raw), ctx.seed};
    } catch (const std::exception& e) {
        std::cerr << "spincoh: config error: " << e.what() << "\n";
        return 1;
    }

    try {
        return runner(ctx);
    } catch (const UsageError& e) {
        std::cerr << "spincoh: usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "spincoh: data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "spincoh: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const quad::QuadratureError& e) {
        std::cerr << "spincoh: numerical failure: " << e.what()
                  << " (partial value " << e.partial_value << ")\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "spincoh: config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "spincoh: data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "spincoh: error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
