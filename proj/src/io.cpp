#include "spincoh/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spincoh/version.hpp"

namespace spincoh::io {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a:") + buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json provenance_json(const Provenance& p) {
    return json{{"toolkit_version", p.toolkit_version},
                {"config_hash", p.config_hash},
                {"seed", p.seed}};
}

std::string provenance_comment(const Provenance& p) {
    std::ostringstream s;
    s << "# spincoh " << p.toolkit_version << "\n";
    s << "# config_hash: " << p.config_hash << "\n";
    s << "# seed: " << p.seed << "\n";
    return s.str();
}

json spectrum_to_json(const NoiseSpectrum& spectrum) {
    json j;
    j["lorentzians"] = json::array();
    for (const auto& l : spectrum.lorentzians)
        j["lorentzians"].push_back({{"delta", l.delta}, {"tau_c", l.tau_c}});
    if (spectrum.one_over_f)
        j["one_over_f"] = {{"delta_e", spectrum.one_over_f->delta_e},
                           {"exponent_a", spectrum.one_over_f->exponent_a}};
    j["white_floor"] = spectrum.white_floor;
    return j;
}

NoiseSpectrum spectrum_from_json(const json& j) {
    NoiseSpectrum s;
    if (j.contains("lorentzians"))
        for (const auto& lj : j.at("lorentzians"))
            s.lorentzians.push_back(
                {lj.at("delta").get<double>(), lj.at("tau_c").get<double>()});
    if (j.contains("one_over_f") && !j.at("one_over_f").is_null()) {
        const auto& fj = j.at("one_over_f");
        s.one_over_f =
            OneOverFComponent{fj.at("delta_e").get<double>(), fj.at("exponent_a").get<double>()};
    }
    s.white_floor = j.value("white_floor", 0.0);
    validate(s);
    return s;
}

void write_sim_trace_csv(const std::string& path, const SimTrace& trace, const Provenance& p) {
    std::ostringstream s;
    s << provenance_comment(p);
    s << "# n_pulses: " << trace.n_pulses << "\n";
    s << "# t_pi: " << format_double(trace.t_pi) << "\n";
    s << "t_s,c,stderr\n";
    for (std::size_t i = 0; i < trace.time_s.size(); ++i)
        s << format_double(trace.time_s[i]) << "," << format_double(trace.c[i]) << ","
          << format_double(trace.std_err[i]) << "\n";
    write_file(path, s.str());
}

void write_trace_csv(const std::string& path, const CoherenceTrace& trace, const Provenance& p) {
    std::ostringstream s;
    s << provenance_comment(p);
    s << "# n_pulses: " << trace.n_pulses << "\n";
    s << "# t_pi: " << format_double(trace.t_pi) << "\n";
    s << "t_s,c\n";
    for (std::size_t i = 0; i < trace.time_s.size(); ++i)
        s << format_double(trace.time_s[i]) << "," << format_double(trace.c[i]) << "\n";
    write_file(path, s.str());
}

namespace {

std::vector<std::vector<double>> parse_numeric_csv(const std::string& path,
                                                   std::size_t min_columns) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (pos == 0) numeric = false;
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (header_skipped)
                throw std::runtime_error("non-numeric row in '" + path + "': " + line);
            header_skipped = true;
            continue;
        }
        if (row.size() < min_columns)
            throw std::runtime_error("row with fewer than " + std::to_string(min_columns) +
                                     " columns in '" + path + "'");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("no data rows in '" + path + "'");
    return rows;
}

}  // namespace

CoherenceTrace read_trace_csv(const std::string& path) {
    const auto rows = parse_numeric_csv(path, 2);
    CoherenceTrace tr;
    for (const auto& r : rows) {
        tr.time_s.push_back(r[0]);
        tr.c.push_back(r[1]);
    }
    tr.source = path;
    return tr;
}

void write_spectrum_csv(const std::string& path, const BinnedSpectrum& binned,
                        const std::vector<SpectrumPoint>& extra_points, const Provenance& p) {
    const auto source_name = [](NoiseSource s) {
        switch (s) {
            case NoiseSource::Cpmg: return "CPMG";
            case NoiseSource::Dq: return "DQ";
            default: return "SQ";
        }
    };
    std::ostringstream s;
    s << provenance_comment(p);
    s << "# binning: arithmetic mean per geometric bin\n";
    s << "omega_rad_s,S_rad_s,stderr,count,source\n";
    for (std::size_t i = 0; i < binned.omega.size(); ++i)
        s << format_double(binned.omega[i]) << "," << format_double(binned.s_mean[i]) << ","
          << format_double(binned.s_stderr[i]) << "," << binned.count[i] << ",CPMG\n";
    for (const auto& pt : extra_points)
        s << format_double(pt.omega0) << "," << format_double(pt.s_value) << ",0,1,"
          << source_name(pt.source) << "\n";
    write_file(path, s.str());
}

void write_chi_csv(const std::string& path, const ChiCurve& curve, const Provenance& p) {
    std::ostringstream s;
    s << provenance_comment(p);
    s << "# n_pulses: " << curve.n_pulses << "\n";
    s << "t_s,chi\n";
    for (std::size_t i = 0; i < curve.time_s.size(); ++i)
        s << format_double(curve.time_s[i]) << "," << format_double(curve.chi[i]) << "\n";
    write_file(path, s.str());
}

ChiCurve read_chi_csv(const std::string& path) {
    const auto rows = parse_numeric_csv(path, 2);
    ChiCurve c;
    for (const auto& r : rows) {
        c.time_s.push_back(r[0]);
        c.chi.push_back(r[1]);
    }
    c.label = path;
    return c;
}

void write_band_profile_csv(const std::string& path, const BandProfile& profile,
                            const Provenance& p) {
    std::ostringstream s;
    s << provenance_comment(p);
    s << "# fermi_level_eV: " << format_double(profile.fermi_level_ev) << "\n";
    s << "r_nm,phi_eV,Ec_eV,Ev_eV";
    for (const auto& name : profile.defect_names)
        s << "," << name << "_neutral_cm3," << name << "_ionized_cm3";
    s << "\n";
    for (std::size_t i = 0; i < profile.r_nm.size(); ++i) {
        const double u = profile.band_shift_ev[i];
        s << format_double(profile.r_nm[i]) << "," << format_double(u) << ","
          << format_double(profile.band_gap_ev + u) << "," << format_double(u);
        for (std::size_t k = 0; k < profile.defect_names.size(); ++k)
            s << "," << format_double(profile.neutral_density[k][i]) << ","
              << format_double(profile.ionized_density[k][i]);
        s << "\n";
    }
    write_file(path, s.str());
}

std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::string& path) {
    const auto rows = parse_numeric_csv(path, 2);
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(r[0]);
        y.push_back(r[1]);
    }
    return {x, y};
}

std::vector<std::vector<double>> read_columns_csv(const std::string& path,
                                                  std::size_t n_columns) {
    const auto rows = parse_numeric_csv(path, n_columns);
    std::vector<std::vector<double>> cols(n_columns);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < n_columns; ++j) cols[j].push_back(r[j]);
    return cols;
}

}  // namespace spincoh::io
