#include "spincoh/bandbend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spincoh {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQ = 1.602176634e-19;       // C
constexpr double kEps0 = 8.8541878128e-12;   // F/m
constexpr double kBoltzmannJ = 1.380649e-23; // J/K
constexpr double kElectronMass = 9.1093837015e-31;  // kg
constexpr double kPlanck = 6.62607015e-34;   // J s

// Density-of-states effective masses for diamond (literature constants).
constexpr double kMassElectron = 0.57;
constexpr double kMassHole = 0.80;

double kt_ev(double temperature) { return kBoltzmannJ * temperature / kQ; }

// effective DOS in cm^-3
double effective_dos(double mass_ratio, double temperature) {
    const double m = mass_ratio * kElectronMass;
    const double nc_m3 =
        2.0 * std::pow(2.0 * kPi * m * kBoltzmannJ * temperature / (kPlanck * kPlanck), 1.5);
    return nc_m3 * 1e-6;
}

double stable_exp(double x) { return std::exp(std::clamp(x, -500.0, 500.0)); }

struct ChargeModel {
    double gap, kt, nc, nv;
    const std::vector<DefectLevel>* defects;

    // level position above E_v at band shift u
    double level_above_ev(const DefectLevel& d, double u) const {
        return (d.relative_to_conduction ? gap - d.level_ev : d.level_ev) + u;
    }

    double ionized_fraction(const DefectLevel& d, double u, double ef) const {
        const double e = level_above_ev(d, u);
        if (d.kind == DefectKind::Donor)  // empty (positive) fraction
            return 1.0 / (1.0 + d.degeneracy * stable_exp((ef - e) / kt));
        return 1.0 / (1.0 + d.degeneracy * stable_exp((e - ef) / kt));  // filled (negative)
    }

    // net charge density in +q cm^-3
    double rho(double u, double ef) const {
        const double n = nc * stable_exp(-(gap + u - ef) / kt);
        const double p = nv * stable_exp(-(ef - u) / kt);
        double out = p - n;
        for (const auto& d : *defects) {
            const double f = ionized_fraction(d, u, ef);
            out += (d.kind == DefectKind::Donor ? d.density * f : -d.density * f);
        }
        return out;
    }

    double drho_du(double u, double ef) const {
        const double h = 1e-7;
        return (rho(u + h, ef) - rho(u - h, ef)) / (2.0 * h);
    }
};

// Thomas algorithm for a tridiagonal system (in-place on copies).
std::vector<double> solve_tridiag(std::vector<double> lower, std::vector<double> diag,
                                  std::vector<double> upper, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i - 1] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace

MaterialBands MaterialBands::diamond() { return {5.5, 1.5, 5.7, 300.0}; }
MaterialBands MaterialBands::silica() { return {9.4, 0.7, 3.9, 300.0}; }

BandConfig BandConfig::coreshell_default() {
    BandConfig c;
    c.core_radius_nm = 35.0;
    c.material = MaterialBands::diamond();
    c.defects = {
        {"P1", 1.76e19, 1.7, true, DefectKind::Donor, 2.0},
        {"NV", 1.76e17, 2.0, false, DefectKind::Acceptor, 4.0},
    };
    c.surface_bending_ev = +0.225;
    return c;
}

BandConfig BandConfig::bare_default() {
    BandConfig c = coreshell_default();
    c.surface_bending_ev = -0.5;
    return c;
}

void validate(const BandConfig& config) {
    if (config.core_radius_nm <= 0.0)
        throw std::invalid_argument("BandConfig: core radius must be > 0");
    if (config.grid_points < 200)
        throw std::invalid_argument("BandConfig: grid must have >= 200 points");
    if (config.material.band_gap <= 0.0)
        throw std::invalid_argument("BandConfig: band gap must be > 0");
    if (config.material.rel_permittivity < 1.0)
        throw std::invalid_argument("BandConfig: relative permittivity must be >= 1");
    for (const auto& d : config.defects) {
        if (d.density < 0.0) throw std::invalid_argument("BandConfig: defect density < 0");
        const double above_ev = d.relative_to_conduction ? config.material.band_gap - d.level_ev
                                                         : d.level_ev;
        if (above_ev < 0.0 || above_ev > config.material.band_gap)
            throw std::invalid_argument("BandConfig: defect level '" + d.name +
                                        "' outside the gap");
        if (d.degeneracy <= 0.0) throw std::invalid_argument("BandConfig: degeneracy <= 0");
    }
}

HeterojunctionAlignment align_heterojunction(const MaterialBands& diamond,
                                             double fermi_above_ev_diamond,
                                             const MaterialBands& shell,
                                             double fermi_above_ev_shell,
                                             double partition_fraction) {
    const auto fermi_vs_vacuum = [](const MaterialBands& m, double f_above_ev) {
        return -(m.ec_below_vacuum + m.band_gap) + f_above_ev;
    };
    HeterojunctionAlignment out;
    out.delta_ef_ev =
        fermi_vs_vacuum(diamond, fermi_above_ev_diamond) - fermi_vs_vacuum(shell, fermi_above_ev_shell);
    out.diamond_side_bending_ev = partition_fraction * out.delta_ef_ev;
    return out;
}

BandProfile solve_poisson(const BandConfig& config) {
    validate(config);
    const int m = config.grid_points;
    const double radius = config.core_radius_nm;
    const double h = radius / (m - 1);
    const double kt = kt_ev(config.material.temperature);

    ChargeModel model{config.material.band_gap, kt,
                      effective_dos(kMassElectron, config.material.temperature),
                      effective_dos(kMassHole, config.material.temperature), &config.defects};

    // Fermi level from bulk charge neutrality at u = 0
    double lo = 0.0, hi = config.material.band_gap;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (model.rho(0.0, mid) > 0.0 ? lo : hi) = mid;
    }
    const double ef = 0.5 * (lo + hi);

    // Poisson source coefficient: lap u [eV/nm^2] = coef * rho [cm^-3]
    const double coef = kQ * 1e6 * 1e-18 / (config.material.rel_permittivity * kEps0);

    std::vector<double> r(m), u(m);
    for (int i = 0; i < m; ++i) {
        r[i] = i * h;
        u[i] = config.surface_bending_ev * double(i) / double(m - 1);  // linear initial guess
    }

    const auto assemble_residual = [&](const std::vector<double>& uu, std::vector<double>& F) {
        F.assign(m, 0.0);
        for (int i = 1; i < m - 1; ++i) {
            const double lap = (uu[i + 1] - 2.0 * uu[i] + uu[i - 1]) / (h * h) +
                               (uu[i + 1] - uu[i - 1]) / (h * r[i]);
            F[i] = lap - coef * model.rho(uu[i], ef);
        }
        F[0] = 6.0 * (uu[1] - uu[0]) / (h * h) - coef * model.rho(uu[0], ef);
        F[m - 1] = uu[m - 1] - config.surface_bending_ev;
    };

    const double rho_scale = std::abs(coef) * std::max(1.0, [&] {
        double s = model.nc + model.nv;
        for (const auto& d : config.defects) s = std::max(s, d.density);
        return s;
    }());

    std::vector<double> F;
    int iters = 0;
    double max_du = 0.0;
    bool du_converged = false;
    for (iters = 0; iters < 100; ++iters) {
        assemble_residual(u, F);
        double fmax = 0.0;
        for (double v : F) fmax = std::max(fmax, std::abs(v));
        if (du_converged && (fmax <= 1e-9 * rho_scale || max_du < 1e-13)) break;

        std::vector<double> lower(m - 1), diag(m), upper(m - 1), rhs(m);
        for (int i = 1; i < m - 1; ++i) {
            lower[i - 1] = 1.0 / (h * h) - 1.0 / (h * r[i]);
            diag[i] = -2.0 / (h * h) - coef * model.drho_du(u[i], ef);
            upper[i] = 1.0 / (h * h) + 1.0 / (h * r[i]);
            rhs[i] = -F[i];
        }
        diag[0] = -6.0 / (h * h) - coef * model.drho_du(u[0], ef);
        upper[0] = 6.0 / (h * h);
        rhs[0] = -F[0];
        diag[m - 1] = 1.0;
        lower[m - 2] = 0.0;
        rhs[m - 1] = -F[m - 1];

        std::vector<double> du = solve_tridiag(lower, diag, upper, rhs);
        max_du = 0.0;
        for (double v : du) max_du = std::max(max_du, std::abs(v));
        double damp = 1.0;
        if (max_du > 0.5) damp = 0.5 / max_du;  // clamp Newton steps to 0.5 eV
        for (int i = 0; i < m; ++i) u[i] += damp * du[i];
        du_converged = (damp * max_du < 1e-6);
    }
    if (iters >= 100) {
        double fmax = 0.0;
        assemble_residual(u, F);
        for (double v : F) fmax = std::max(fmax, std::abs(v));
        throw std::runtime_error(
            "solve_poisson: Newton did not converge in 100 iterations (last |du| = " +
            std::to_string(max_du) + ", residual = " + std::to_string(fmax / rho_scale) + ")");
    }

    BandProfile prof;
    prof.r_nm = r;
    prof.band_shift_ev = u;
    prof.fermi_level_ev = ef;
    prof.band_gap_ev = config.material.band_gap;
    prof.newton_iterations = iters;
    prof.surface_bending_ev = config.surface_bending_ev;
    prof.core_radius_nm = radius;
    {
        assemble_residual(u, F);
        double fmax = 0.0;
        for (double v : F) fmax = std::max(fmax, std::abs(v));
        prof.residual_norm = fmax / rho_scale;
    }
    for (const auto& d : config.defects) {
        prof.defect_names.push_back(d.name);
        std::vector<double> neutral(m), ionized(m);
        for (int i = 0; i < m; ++i) {
            const double f = model.ionized_fraction(d, u[i], ef);
            ionized[i] = d.density * f;
            neutral[i] = d.density * (1.0 - f);
        }
        prof.neutral_density.push_back(std::move(neutral));
        prof.ionized_density.push_back(std::move(ionized));
    }

    // Gauss's-law closure: integrated net charge vs the surface-field charge.
    {
        double q_vol = 0.0;  // in q * cm^-3 * nm^3
        for (int i = 1; i < m; ++i) {
            const double rho_a = model.rho(u[i - 1], ef), rho_b = model.rho(u[i], ef);
            q_vol += 0.5 * (rho_a * r[i - 1] * r[i - 1] + rho_b * r[i] * r[i]) * h;
        }
        q_vol *= 4.0 * kPi;
        // u'(R) one-sided, second order (V/nm)
        const double du_dr =
            (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * h);
        // equate in the same unit system: rho[cm^-3] enters lap via coef, so
        // the surface charge in matching units is eps-eps0/q * du/dr * ...
        const double q_surf = du_dr / coef * 4.0 * kPi * radius * radius;
        double scale = 0.0;
        for (const auto& d : config.defects)
            scale = std::max(scale, d.density * 4.0 / 3.0 * kPi * radius * radius * radius);
        const double denom = std::max({std::abs(q_surf), std::abs(q_vol), 1e-9 * scale, 1e-300});
        prof.gauss_closure = std::abs(q_vol - q_surf) / denom;
    }
    return prof;
}

namespace {

int find_defect(const BandProfile& profile, const std::string& name) {
    for (std::size_t i = 0; i < profile.defect_names.size(); ++i)
        if (profile.defect_names[i] == name) return int(i);
    throw std::invalid_argument("profile has no defect named '" + name + "'");
}

double sphere_integral(const std::vector<double>& r, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i)
        acc += 0.5 * (f[i - 1] * r[i - 1] * r[i - 1] + f[i] * r[i] * r[i]) * (r[i] - r[i - 1]);
    return 4.0 * kPi * acc;
}

// reference count for a uniform density, on the same quadrature as the
// profile integrals so flat-band comparisons cancel exactly
double sphere_uniform_count(const std::vector<double>& r, double density) {
    return sphere_integral(r, std::vector<double>(r.size(), density));
}

}  // namespace

DepletionReport p1_depletion_report(const BandProfile& profile, const std::string& p1_name,
                                    double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("p1_depletion_report: threshold must be in (0,1)");
    const int k = find_defect(profile, p1_name);
    const auto& n0 = profile.neutral_density[k];
    const auto& r = profile.r_nm;
    const double bulk = n0.front();
    DepletionReport rep;
    rep.threshold = threshold;
    if (bulk <= 0.0) return rep;

    const double target = threshold * bulk;
    const double radius = r.back();
    // walk inward from the surface to the first recovery above the threshold
    if (n0.back() >= target) {
        rep.width_nm = 0.0;
    } else {
        rep.width_nm = radius;  // fully depleted unless a crossing is found
        for (std::size_t i = r.size() - 1; i-- > 0;) {
            if (n0[i] >= target) {
                const double frac = (target - n0[i]) / (n0[i + 1] - n0[i]);
                rep.width_nm = radius - (r[i] + frac * (r[i + 1] - r[i]));
                break;
            }
        }
    }
    const double total = sphere_integral(r, n0);
    const double flat = sphere_uniform_count(r, bulk);
    rep.fraction_reduced = std::max(1.0 - total / flat, 0.0);
    return rep;
}

double nv_stability_report(const BandProfile& profile, const std::string& nv_name) {
    const int k = find_defect(profile, nv_name);
    const auto& r = profile.r_nm;
    const auto& ionized = profile.ionized_density[k];
    const double bent = sphere_integral(r, ionized);
    const double flat = sphere_uniform_count(r, ionized.front());
    if (flat <= 0.0) return 0.0;
    return bent / flat - 1.0;
}

}  // namespace spincoh
