#pragma once

#include <string>
#include <vector>

namespace spincoh {

// Band parameters of one material. `ec_below_vacuum` is the bulk
// conduction-band depth below the vacuum level, the quantity entering
// heterojunction alignment.
struct MaterialBands {
    double band_gap = 5.5;         // eV
    double ec_below_vacuum = 1.5;  // eV
    double rel_permittivity = 5.7;
    double temperature = 300.0;    // K

    static MaterialBands diamond();
    static MaterialBands silica();
};

enum class DefectKind { Donor, Acceptor };

// A defect level inside the gap. `level_ev` is measured from the band named
// by `relative_to_conduction`: donors are usually quoted below E_c, acceptors
// above E_v.
struct DefectLevel {
    std::string name;
    double density = 0.0;  // cm^-3
    double level_ev = 0.0; // offset magnitude (eV)
    bool relative_to_conduction = true;
    DefectKind kind = DefectKind::Donor;
    double degeneracy = 2.0;
};

struct BandConfig {
    double core_radius_nm = 35.0;
    MaterialBands material = MaterialBands::diamond();
    std::vector<DefectLevel> defects;   // P1, NV, optional vacancies
    double surface_bending_ev = 0.0;    // signed; negative = downward
    int grid_points = 2000;             // >= 200

    // Type-Ib defaults: P1 donor 100 ppm at E_c - 1.7 eV (g = 2) and an
    // NV acceptor at 1/100 of that density at E_v + 2 eV (g = 4).
    static BandConfig coreshell_default();
    static BandConfig bare_default();
};

void validate(const BandConfig& config);

// Solved radial band profile. Energies in eV with E_v(bulk) = 0; the Fermi
// level is flat and fixed by charge neutrality at r = 0.
struct BandProfile {
    std::vector<double> r_nm;
    std::vector<double> band_shift_ev;  // u(r); E_c = gap + u, E_v = u
    double fermi_level_ev = 0.0;
    double band_gap_ev = 0.0;
    std::vector<std::string> defect_names;
    std::vector<std::vector<double>> neutral_density;  // [defect][r], cm^-3
    std::vector<std::vector<double>> ionized_density;  // [defect][r], cm^-3
    double residual_norm = 0.0;   // discrete Poisson residual (eV/nm^2 scale)
    int newton_iterations = 0;
    double surface_bending_ev = 0.0;
    double core_radius_nm = 0.0;
    // Gauss's-law closure: relative mismatch between the integrated charge
    // and the surface-field charge.
    double gauss_closure = 0.0;
};

// Fermi-level mismatch across the junction before contact (vacuum-referenced)
// and its diamond-side share.
struct HeterojunctionAlignment {
    double delta_ef_ev = 0.0;          // E_f(diamond) - E_f(shell)
    double diamond_side_bending_ev = 0.0;  // partition_fraction * delta_ef
};

// `fermi_above_ev_*`: Fermi positions above each material's valence band.
// The default partition fraction reproduces a +0.225 eV diamond-side bending
// for the diamond/silica pair (0.225/1.45).
HeterojunctionAlignment align_heterojunction(const MaterialBands& diamond,
                                             double fermi_above_ev_diamond,
                                             const MaterialBands& shell,
                                             double fermi_above_ev_shell,
                                             double partition_fraction = 0.225 / 1.45);

// Nonlinear Poisson solve (1/r^2) d/dr(r^2 eps eps0 du/dr) = q rho(u, r) on a
// uniform radial grid; Boltzmann carriers, Fermi-Dirac defect occupations,
// Neumann at r = 0, Dirichlet u(R) = surface bending. Damped Newton until
// max |du| < 1e-6 eV. Throws std::runtime_error with the last residual on
// divergence.
BandProfile solve_poisson(const BandConfig& config);

struct DepletionReport {
    double width_nm = 0.0;       // surface depth where neutral density recovers
                                 // to `threshold` of its bulk value
    double fraction_reduced = 0.0;  // 1 - integrated neutral count / bulk count
    double threshold = 0.5;
};

DepletionReport p1_depletion_report(const BandProfile& profile, const std::string& p1_name,
                                    double threshold = 0.5);

// Relative change of the integrated ionized-acceptor (NV-) count against the
// flat-band profile.
double nv_stability_report(const BandProfile& profile, const std::string& nv_name = "NV");

}  // namespace spincoh
