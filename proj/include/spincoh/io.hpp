#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spincoh/bandbend.hpp"
#include "spincoh/bathsim.hpp"
#include "spincoh/extract.hpp"
#include "spincoh/filterfn.hpp"

#include "json.hpp"

namespace spincoh::io {

using json = nlohmann::json;

// Every output file carries the toolkit version, the hash of the config it
// was produced from, and the RNG seed.
struct Provenance {
    std::string toolkit_version;
    std::string config_hash;
    std::uint64_t seed = 0;
};

std::string fnv1a_hex(const std::string& bytes);

// Shortest exact decimal form; used for every CSV number so identical values
// produce identical bytes.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

json provenance_json(const Provenance& p);
std::string provenance_comment(const Provenance& p);

// NoiseSpectrum <-> config-schema JSON:
// {"lorentzians": [{"delta":, "tau_c":}, ...],
//  "one_over_f": {"delta_e":, "exponent_a":},   (optional)
//  "white_floor": 0.0}
json spectrum_to_json(const NoiseSpectrum& spectrum);
NoiseSpectrum spectrum_from_json(const json& j);

// trace CSVs: header t_s,c (simulated traces add a stderr column)
void write_sim_trace_csv(const std::string& path, const SimTrace& trace, const Provenance& p);
void write_trace_csv(const std::string& path, const CoherenceTrace& trace, const Provenance& p);
CoherenceTrace read_trace_csv(const std::string& path);

// spectrum CSV: omega_rad_s,S_rad_s,stderr,count,source
void write_spectrum_csv(const std::string& path, const BinnedSpectrum& binned,
                        const std::vector<SpectrumPoint>& extra_points, const Provenance& p);

// chi curve CSV: t_s,chi
void write_chi_csv(const std::string& path, const ChiCurve& curve, const Provenance& p);
ChiCurve read_chi_csv(const std::string& path);

// band profile CSV: r_nm,phi_eV,Ec_eV,Ev_eV,<defect>_neutral_cm3,<defect>_ionized_cm3,...
void write_band_profile_csv(const std::string& path, const BandProfile& profile,
                            const Provenance& p);

// generic two-column numeric CSV (skips # comments and one header line)
std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::string& path);

// multi-column numeric CSV; returns column-major values
std::vector<std::vector<double>> read_columns_csv(const std::string& path,
                                                  std::size_t n_columns);

}  // namespace spincoh::io
