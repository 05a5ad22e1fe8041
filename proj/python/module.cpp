// pybind11 bindings for the spincoh core: spectra, filter functions, Monte
// Carlo baths, spectral extraction, fitting, and band bending.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spincoh/bandbend.hpp"
#include "spincoh/bathsim.hpp"
#include "spincoh/extract.hpp"
#include "spincoh/filterfn.hpp"
#include "spincoh/fitkit.hpp"
#include "spincoh/spectra.hpp"
#include "spincoh/version.hpp"

namespace py = pybind11;
using namespace spincoh;

PYBIND11_MODULE(_core, m) {
    m.doc() = "spin-qubit decoherence analysis toolkit (C++ core)";
    m.attr("__version__") = version;

    // ---- spectra ----
    py::class_<LorentzianComponent>(m, "LorentzianComponent")
        .def(py::init<double, double>(), py::arg("delta"), py::arg("tau_c"))
        .def_readwrite("delta", &LorentzianComponent::delta)
        .def_readwrite("tau_c", &LorentzianComponent::tau_c);
    py::class_<OneOverFComponent>(m, "OneOverFComponent")
        .def(py::init<double, double>(), py::arg("delta_e"), py::arg("exponent_a"))
        .def_readwrite("delta_e", &OneOverFComponent::delta_e)
        .def_readwrite("exponent_a", &OneOverFComponent::exponent_a);
    py::class_<NoiseSpectrum>(m, "NoiseSpectrum")
        .def(py::init<>())
        .def_readwrite("lorentzians", &NoiseSpectrum::lorentzians)
        .def_readwrite("one_over_f", &NoiseSpectrum::one_over_f)
        .def_readwrite("white_floor", &NoiseSpectrum::white_floor)
        .def_static("white", &NoiseSpectrum::white, py::arg("s0"))
        .def_static("single_lorentzian", &NoiseSpectrum::single_lorentzian,
                    py::arg("delta"), py::arg("tau_c"));
    m.def("eval_lorentzian_sum", &eval_lorentzian_sum, py::arg("components"), py::arg("omega"));
    m.def("eval_total", &eval_total, py::arg("spectrum"), py::arg("omega"));
    m.def("lorentzian_comb_for_power_law", &lorentzian_comb_for_power_law, py::arg("term"),
          py::arg("omega_min"), py::arg("omega_max"), py::arg("per_decade") = 4);

    // ---- filterfn ----
    py::enum_<SequenceKind>(m, "SequenceKind")
        .value("Echo", SequenceKind::Echo)
        .value("Cpmg", SequenceKind::Cpmg);
    py::class_<DecouplingSequence>(m, "DecouplingSequence")
        .def_static("echo", &DecouplingSequence::echo, py::arg("total_time"),
                    py::arg("t_pi") = 0.0)
        .def_static("cpmg", &DecouplingSequence::cpmg, py::arg("n_pulses"),
                    py::arg("total_time"), py::arg("t_pi") = 0.0)
        .def_readwrite("n_pulses", &DecouplingSequence::n_pulses)
        .def_readwrite("t_pi", &DecouplingSequence::t_pi)
        .def_readwrite("total_time", &DecouplingSequence::total_time)
        .def_readwrite("kind", &DecouplingSequence::kind);
    py::class_<ChiCurve>(m, "ChiCurve")
        .def(py::init<>())
        .def_readwrite("time_s", &ChiCurve::time_s)
        .def_readwrite("chi", &ChiCurve::chi)
        .def_readwrite("n_pulses", &ChiCurve::n_pulses)
        .def_readwrite("t_pi", &ChiCurve::t_pi)
        .def_readwrite("label", &ChiCurve::label);
    m.def("filter_function", &filter_function, py::arg("x"), py::arg("n_pulses"));
    m.def("filter_weight", &filter_weight, py::arg("omega"), py::arg("sequence"));
    m.def(
        "chi_exact",
        [](const NoiseSpectrum& s, const DecouplingSequence& q, double rel_tol) {
            ChiOptions o;
            o.rel_tol = rel_tol;
            return chi_exact(s, q, o);
        },
        py::arg("spectrum"), py::arg("sequence"), py::arg("rel_tol") = 1e-6);
    m.def("chi_delta", &chi_delta, py::arg("spectrum"), py::arg("n_pulses"),
          py::arg("total_time"));
    m.def("delta_calibration", &delta_calibration);
    m.def("predict_t2_curve", &predict_t2_curve, py::arg("spectrum"), py::arg("n_values"),
          py::arg("chi_threshold") = 1.0);
    m.def(
        "compute_chi_curve",
        [](const NoiseSpectrum& s, int n, double t_pi, const std::vector<double>& times) {
            return compute_chi_curve(s, n, t_pi, times);
        },
        py::arg("spectrum"), py::arg("n_pulses"), py::arg("t_pi"), py::arg("times"));

    // ---- bathsim ----
    py::class_<OUParams>(m, "OUParams")
        .def(py::init([](double delta, double tau_c, double dt, std::uint64_t seed) {
                 return OUParams{delta, tau_c, dt, seed};
             }),
             py::arg("delta"), py::arg("tau_c"), py::arg("dt"), py::arg("seed") = 1)
        .def_readwrite("delta", &OUParams::delta)
        .def_readwrite("tau_c", &OUParams::tau_c)
        .def_readwrite("dt", &OUParams::dt)
        .def_readwrite("seed", &OUParams::seed);
    m.def("spectrum_of", &spectrum_of, py::arg("params"));
    m.def("ou_params_for", &ou_params_for, py::arg("component"), py::arg("dt"), py::arg("seed"));
    m.def("ou_trajectory", &ou_trajectory, py::arg("params"), py::arg("duration"));
    py::enum_<PulseDephasingMode>(m, "PulseDephasingMode")
        .value("AccumulateDuringPulse", PulseDephasingMode::AccumulateDuringPulse)
        .value("FrozenDuringPulse", PulseDephasingMode::FrozenDuringPulse)
        .value("ZeroWidth", PulseDephasingMode::ZeroWidth);
    py::class_<CoherencePoint>(m, "CoherencePoint")
        .def_readonly("t", &CoherencePoint::t)
        .def_readonly("c", &CoherencePoint::c)
        .def_readonly("std_err", &CoherencePoint::std_err);
    py::class_<SimTrace>(m, "SimTrace")
        .def_readonly("n_pulses", &SimTrace::n_pulses)
        .def_readonly("t_pi", &SimTrace::t_pi)
        .def_readonly("time_s", &SimTrace::time_s)
        .def_readonly("c", &SimTrace::c)
        .def_readonly("std_err", &SimTrace::std_err)
        .def("as_coherence_trace", &SimTrace::as_coherence_trace, py::arg("source"));
    m.def(
        "simulate_coherence",
        [](const std::vector<OUParams>& comps, const DecouplingSequence& seq,
           PulseDephasingMode mode, int n_shots, std::uint64_t seed, int n_threads) {
            return simulate_coherence(comps, seq, mode, n_shots, seed, n_threads);
        },
        py::arg("components"), py::arg("sequence"), py::arg("mode"), py::arg("n_shots"),
        py::arg("seed"), py::arg("n_threads") = 0);
    m.def("simulate_coherence_curve", &simulate_coherence_curve, py::arg("components"),
          py::arg("n_pulses"), py::arg("t_pi"), py::arg("times"), py::arg("mode"),
          py::arg("n_shots"), py::arg("seed"), py::arg("n_threads") = 0);
    py::enum_<HoppingMode>(m, "HoppingMode")
        .value("NoHopping", HoppingMode::None)
        .value("ResamplePerShot", HoppingMode::ResamplePerShot);
    py::class_<DipolarBathConfig>(m, "DipolarBathConfig")
        .def(py::init<>())
        .def_readwrite("dimensionality", &DipolarBathConfig::dimensionality)
        .def_readwrite("interaction_exponent", &DipolarBathConfig::interaction_exponent)
        .def_readwrite("spin_density", &DipolarBathConfig::spin_density)
        .def_readwrite("flip_rate", &DipolarBathConfig::flip_rate)
        .def_readwrite("hopping", &DipolarBathConfig::hopping)
        .def_readwrite("coupling_prefactor", &DipolarBathConfig::coupling_prefactor)
        .def_readwrite("exclusion_radius", &DipolarBathConfig::exclusion_radius)
        .def_readwrite("n_spins", &DipolarBathConfig::n_spins)
        .def_readwrite("region_size", &DipolarBathConfig::region_size)
        .def_readwrite("seed", &DipolarBathConfig::seed);
    m.def("dipolar_echo_ensemble", &dipolar_echo_ensemble, py::arg("config"), py::arg("times"),
          py::arg("n_realizations"));

    // ---- extract ----
    py::class_<CoherenceTrace>(m, "CoherenceTrace")
        .def(py::init<>())
        .def_readwrite("n_pulses", &CoherenceTrace::n_pulses)
        .def_readwrite("t_pi", &CoherenceTrace::t_pi)
        .def_readwrite("time_s", &CoherenceTrace::time_s)
        .def_readwrite("c", &CoherenceTrace::c)
        .def_readwrite("source", &CoherenceTrace::source);
    py::class_<Normalization> norm(m, "Normalization");
    py::enum_<Normalization::Mode>(norm, "Mode")
        .value("Identity", Normalization::Mode::Identity)
        .value("Affine", Normalization::Mode::Affine)
        .value("MinMax", Normalization::Mode::MinMax);
    norm.def(py::init<>())
        .def_readwrite("mode", &Normalization::mode)
        .def_readwrite("baseline", &Normalization::baseline)
        .def_readwrite("amplitude", &Normalization::amplitude);
    py::enum_<NoiseSource>(m, "NoiseSource")
        .value("Cpmg", NoiseSource::Cpmg)
        .value("Dq", NoiseSource::Dq)
        .value("Sq", NoiseSource::Sq);
    py::class_<SpectrumPoint>(m, "SpectrumPoint")
        .def_readwrite("omega0", &SpectrumPoint::omega0)
        .def_readwrite("s_value", &SpectrumPoint::s_value)
        .def_readwrite("source", &SpectrumPoint::source)
        .def_readwrite("weight", &SpectrumPoint::weight);
    py::class_<BinnedSpectrum>(m, "BinnedSpectrum")
        .def(py::init<>())
        .def_readwrite("omega", &BinnedSpectrum::omega)
        .def_readwrite("s_mean", &BinnedSpectrum::s_mean)
        .def_readwrite("s_stderr", &BinnedSpectrum::s_stderr)
        .def_readwrite("count", &BinnedSpectrum::count);
    m.def("normalize_trace", &normalize_trace, py::arg("raw"),
          py::arg("normalization") = Normalization{});
    m.def("extract_spectrum", &extract_spectrum, py::arg("traces"), py::arg("min_pulses") = 64);
    m.def("log_bin", &log_bin, py::arg("points"), py::arg("n_bins") = 14);
    py::class_<OverviewAnchors>(m, "OverviewAnchors")
        .def(py::init<>())
        .def_readwrite("gamma_dq", &OverviewAnchors::gamma_dq)
        .def_readwrite("omega_dq", &OverviewAnchors::omega_dq)
        .def_readwrite("omega_sq_rate", &OverviewAnchors::omega_sq_rate)
        .def_readwrite("omega_sq", &OverviewAnchors::omega_sq);
    m.def("assemble_overview", &assemble_overview, py::arg("binned"), py::arg("anchors"));

    // ---- fitkit ----
    py::class_<StretchedExpFit>(m, "StretchedExpFit")
        .def_readonly("amplitude", &StretchedExpFit::amplitude)
        .def_readonly("t2", &StretchedExpFit::t2)
        .def_readonly("stretch_n", &StretchedExpFit::stretch_n)
        .def_readonly("t0", &StretchedExpFit::t0)
        .def_readonly("residual_norm", &StretchedExpFit::residual_norm)
        .def_readonly("r2", &StretchedExpFit::r2)
        .def_readonly("converged", &StretchedExpFit::converged)
        .def_readonly("amplitude_clipped", &StretchedExpFit::amplitude_clipped);
    m.def("fit_stretched_exp", &fit_stretched_exp, py::arg("trace"));
    m.def("fit_amplitude_monotone", &fit_amplitude_monotone, py::arg("traces"));
    py::class_<PowerLawFit>(m, "PowerLawFit")
        .def_readonly("t2_echo", &PowerLawFit::t2_echo)
        .def_readonly("k", &PowerLawFit::k)
        .def_readonly("k_stderr", &PowerLawFit::k_stderr)
        .def_readonly("t2_echo_stderr", &PowerLawFit::t2_echo_stderr)
        .def_readonly("r2", &PowerLawFit::r2);
    m.def("fit_power_law", &fit_power_law, py::arg("points"));
    py::class_<RelaxationTrace>(m, "RelaxationTrace")
        .def(py::init<>())
        .def_readwrite("time_s", &RelaxationTrace::time_s)
        .def_readwrite("signal", &RelaxationTrace::signal);
    py::class_<RatePair>(m, "RatePair")
        .def_readonly("omega_sq_rate", &RatePair::omega_sq_rate)
        .def_readonly("gamma_dq_rate", &RatePair::gamma_dq_rate)
        .def_readonly("t1_sq", &RatePair::t1_sq)
        .def_readonly("t1_dq", &RatePair::t1_dq)
        .def_readonly("gamma_negative_flag", &RatePair::gamma_negative_flag);
    m.def("fit_rate_equations", &fit_rate_equations, py::arg("sq_trace"), py::arg("dq_trace"));
    py::class_<ExpDecayFit>(m, "ExpDecayFit")
        .def_readonly("amplitude", &ExpDecayFit::amplitude)
        .def_readonly("rate", &ExpDecayFit::rate)
        .def_readonly("offset", &ExpDecayFit::offset)
        .def_readonly("r2", &ExpDecayFit::r2)
        .def_readonly("converged", &ExpDecayFit::converged);
    m.def("fit_exp_decay", &fit_exp_decay, py::arg("t"), py::arg("y"),
          py::arg("with_offset") = false);
    py::class_<DqAnchor>(m, "DqAnchor")
        .def(py::init<double, double>(), py::arg("s_dq"), py::arg("omega_dq"))
        .def_readwrite("s_dq", &DqAnchor::s_dq)
        .def_readwrite("omega_dq", &DqAnchor::omega_dq);
    py::class_<NoiseFitResult>(m, "NoiseFitResult")
        .def_readonly("spectrum", &NoiseFitResult::spectrum)
        .def_readonly("exponent_a", &NoiseFitResult::exponent_a)
        .def_readonly("delta_e", &NoiseFitResult::delta_e)
        .def_readonly("r2", &NoiseFitResult::r2)
        .def_readonly("tau_upper_bound", &NoiseFitResult::tau_upper_bound)
        .def_readonly("failed", &NoiseFitResult::failed);
    m.def("fit_noise_model", &fit_noise_model, py::arg("binned"), py::arg("anchor"),
          py::arg("n_lorentzians"), py::arg("with_white"));
    py::enum_<BathVerdict>(m, "BathVerdict")
        .value("FixedMarkovian", BathVerdict::FixedMarkovian)
        .value("ConfigurationalAveraging", BathVerdict::ConfigurationalAveraging)
        .value("Indeterminate", BathVerdict::Indeterminate);
    py::class_<BathClassification>(m, "BathClassification")
        .def_readonly("n_rw", &BathClassification::n_rw)
        .def_readonly("n_rw_stderr", &BathClassification::n_rw_stderr)
        .def_readonly("n_ballistic", &BathClassification::n_ballistic)
        .def_readonly("verdict", &BathClassification::verdict)
        .def_readonly("candidates", &BathClassification::candidates)
        .def_readonly("reason", &BathClassification::reason);
    m.def("classify_bath", &classify_bath, py::arg("echo"), py::arg("tau_c"));
    py::class_<UnmixResult>(m, "UnmixResult")
        .def_readonly("a", &UnmixResult::a)
        .def_readonly("nv_minus_fraction", &UnmixResult::nv_minus_fraction);
    m.def("unmix_pl", &unmix_pl, py::arg("measured"), py::arg("ref_nv0"), py::arg("ref_nvm"));
    py::class_<DeerSignals>(m, "DeerSignals")
        .def_readonly("s_d", &DeerSignals::s_d)
        .def_readonly("s_e", &DeerSignals::s_e)
        .def_readonly("s_fid", &DeerSignals::s_fid);
    m.def("deer_signals", &deer_signals, py::arg("f1"), py::arg("f2"), py::arg("f3"),
          py::arg("f4"));
    m.def("deer_signal_series", &deer_signal_series, py::arg("f1"), py::arg("f2"),
          py::arg("f3"), py::arg("f4"));

    // ---- bandbend ----
    py::class_<MaterialBands>(m, "MaterialBands")
        .def(py::init<>())
        .def_readwrite("band_gap", &MaterialBands::band_gap)
        .def_readwrite("ec_below_vacuum", &MaterialBands::ec_below_vacuum)
        .def_readwrite("rel_permittivity", &MaterialBands::rel_permittivity)
        .def_readwrite("temperature", &MaterialBands::temperature)
        .def_static("diamond", &MaterialBands::diamond)
        .def_static("silica", &MaterialBands::silica);
    py::enum_<DefectKind>(m, "DefectKind")
        .value("Donor", DefectKind::Donor)
        .value("Acceptor", DefectKind::Acceptor);
    py::class_<DefectLevel>(m, "DefectLevel")
        .def(py::init<>())
        .def_readwrite("name", &DefectLevel::name)
        .def_readwrite("density", &DefectLevel::density)
        .def_readwrite("level_ev", &DefectLevel::level_ev)
        .def_readwrite("relative_to_conduction", &DefectLevel::relative_to_conduction)
        .def_readwrite("kind", &DefectLevel::kind)
        .def_readwrite("degeneracy", &DefectLevel::degeneracy);
    py::class_<BandConfig>(m, "BandConfig")
        .def(py::init<>())
        .def_readwrite("core_radius_nm", &BandConfig::core_radius_nm)
        .def_readwrite("material", &BandConfig::material)
        .def_readwrite("defects", &BandConfig::defects)
        .def_readwrite("surface_bending_ev", &BandConfig::surface_bending_ev)
        .def_readwrite("grid_points", &BandConfig::grid_points)
        .def_static("coreshell_default", &BandConfig::coreshell_default)
        .def_static("bare_default", &BandConfig::bare_default);
    py::class_<BandProfile>(m, "BandProfile")
        .def_readonly("r_nm", &BandProfile::r_nm)
        .def_readonly("band_shift_ev", &BandProfile::band_shift_ev)
        .def_readonly("fermi_level_ev", &BandProfile::fermi_level_ev)
        .def_readonly("band_gap_ev", &BandProfile::band_gap_ev)
        .def_readonly("defect_names", &BandProfile::defect_names)
        .def_readonly("neutral_density", &BandProfile::neutral_density)
        .def_readonly("ionized_density", &BandProfile::ionized_density)
        .def_readonly("residual_norm", &BandProfile::residual_norm)
        .def_readonly("newton_iterations", &BandProfile::newton_iterations)
        .def_readonly("gauss_closure", &BandProfile::gauss_closure);
    py::class_<HeterojunctionAlignment>(m, "HeterojunctionAlignment")
        .def_readonly("delta_ef_ev", &HeterojunctionAlignment::delta_ef_ev)
        .def_readonly("diamond_side_bending_ev",
                      &HeterojunctionAlignment::diamond_side_bending_ev);
    m.def("align_heterojunction", &align_heterojunction, py::arg("diamond"),
          py::arg("fermi_above_ev_diamond"), py::arg("shell"), py::arg("fermi_above_ev_shell"),
          py::arg("partition_fraction") = 0.225 / 1.45);
    m.def("solve_poisson", &solve_poisson, py::arg("config"));
    py::class_<DepletionReport>(m, "DepletionReport")
        .def_readonly("width_nm", &DepletionReport::width_nm)
        .def_readonly("fraction_reduced", &DepletionReport::fraction_reduced)
        .def_readonly("threshold", &DepletionReport::threshold);
    m.def("p1_depletion_report", &p1_depletion_report, py::arg("profile"), py::arg("p1_name"),
          py::arg("threshold") = 0.5);
    m.def("nv_stability_report", &nv_stability_report, py::arg("profile"),
          py::arg("nv_name") = "NV");
}
