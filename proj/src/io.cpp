#include "spinspec/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace spinspec {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& field, double& out) {
    const std::string t = trim(field);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

std::vector<std::string> split_fields(const std::string& line, SpectrumFormat format) {
    std::vector<std::string> fields;
    if (format == SpectrumFormat::Csv) {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
    } else {
        std::stringstream ss(line);
        std::string field;
        while (ss >> field) fields.push_back(field);
    }
    return fields;
}

// Every key any subcommand understands; typos fail loudly without binding a
// config file to a single subcommand.
const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "omega_s_khz",     "gamma_s0_hz",      "gamma_s_pb_hz",  "readout_khz",
        "n_s",             "eta",              "phi_rad",        "alpha_rad",
        "delta_ghz",       "a2_over_a1",       "dc_weight",      "dc_exponent",
        "dc_halfwidth_khz","dc_phase_weight",  "s_bb",           "a_coeff_hz3",
        "c_coeff_hz3",     "d_coeff",          "r_exp",          "gwd_omega_qi_hz",
        "gwd_squeeze_db",  "gwd_c_q",          "gwd_n_s",        "gwd_omega_s_hz",
        "gwd_readout_hz",  "gwd_gamma_s_hz",   "gwd_phi_rad",    "mors_omega_qzs_hz",
        "mors_linewidth_hz"};
    return keys;
}

}  // namespace

LoadedSpectrum parse_spectrum(std::istream& in, SpectrumFormat format, const std::string& origin) {
    LoadedSpectrum out;
    std::string line;
    long line_no = 0;
    double prev = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = split_fields(t, format);
        if (fields.size() != 2)
            throw ParseError(origin + ": expected two columns, got " + std::to_string(fields.size()),
                             line_no);
        double f = 0.0;
        double v = 0.0;
        if (!parse_number(fields[0], f))
            throw ParseError(origin + ": bad frequency field '" + trim(fields[0]) + "'", line_no);
        if (!parse_number(fields[1], v))
            throw ParseError(origin + ": bad PSD field '" + trim(fields[1]) + "'", line_no);
        if (f <= prev)
            throw ParseError(origin + ": frequency grid must be strictly increasing", line_no);
        prev = f;
        if (v < 0.0 && !out.has_negative) {
            out.has_negative = true;
            out.warnings.push_back(origin + ": negative PSD value at line " +
                                   std::to_string(line_no) +
                                   " (calibration-subtracted data); flag propagated to fits");
        }
        out.spectrum.freqs_hz.push_back(f);
        out.spectrum.values.push_back(v);
    }
    if (out.spectrum.freqs_hz.empty()) throw ParseError(origin + ": no spectrum rows found");
    return out;
}

LoadedSpectrum load_spectrum(const std::string& path, SpectrumFormat format) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open spectrum file: " + path);
    return parse_spectrum(in, format, path);
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void save_spectrum(const Spectrum& s, std::ostream& out, const std::string& header) {
    s.validate();
    if (!header.empty()) out << "# " << header << "\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_value(s.freqs_hz[i]) << ',' << format_value(s.values[i]) << '\n';
}

void save_spectrum(const Spectrum& s, const std::string& path, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open output file: " + path);
    save_spectrum(s, out, header);
}

Config Config::parse(std::istream& in, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ": expected 'key = value'", line_no);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(origin + ": empty key or value", line_no);
        if (!known_keys().count(key))
            throw ParseError(origin + ": unknown configuration key '" + key + "'", line_no);
        if (cfg.kv_.count(key))
            throw ParseError(origin + ": duplicate key '" + key + "'", line_no);
        cfg.kv_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    return parse(in, path);
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

double Config::number(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw UsageError(origin_ + ": missing required key '" + key + "'");
    double v = 0.0;
    if (!parse_number(it->second, v))
        throw ParseError(origin_ + ": key '" + key + "' is not a finite number");
    return v;
}

double Config::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string Config::text_or(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

ModelConfig parse_model_config(const Config& cfg) {
    ModelConfig m;
    m.params.omega_s = two_pi * 1e3 * cfg.number_or("omega_s_khz", 0.0);
    m.params.gamma_s0 = two_pi * cfg.number_or("gamma_s0_hz", 0.0);
    m.params.gamma_s_pb = two_pi * cfg.number_or("gamma_s_pb_hz", 0.0);
    m.params.readout_rate = two_pi * 1e3 * cfg.number_or("readout_khz", 0.0);
    m.params.n_s = cfg.number_or("n_s", 0.0);

    m.probe.phi = cfg.number_or("phi_rad", 0.0);
    m.probe.eta = cfg.number_or("eta", 1.0);
    m.probe.alpha = cfg.number_or("alpha_rad", pi / 4);
    m.probe.delta = two_pi * 1e9 * cfg.number_or("delta_ghz", 1.6);

    m.tensor.a2_over_a1 = cfg.number_or("a2_over_a1", 0.0);
    m.tensor.dc_weight = cfg.number_or("dc_weight", 0.0);
    m.tensor.dc_exponent = cfg.number_or("dc_exponent", 5.0);
    m.tensor.dc_halfwidth = two_pi * 1e3 * cfg.number_or("dc_halfwidth_khz", 1.0);
    const std::string weight = cfg.text_or("dc_phase_weight", "cos2");
    if (weight == "cos2")
        m.tensor.dc_phase = DcPhaseWeight::Cos2;
    else if (weight == "sin2")
        m.tensor.dc_phase = DcPhaseWeight::Sin2;
    else
        throw UsageError("dc_phase_weight must be cos2 or sin2");

    m.s_bb = cfg.number_or("s_bb", 0.0);

    m.det_a_hz3 = cfg.number_or("a_coeff_hz3", 0.0);
    m.det_c_hz3 = cfg.number_or("c_coeff_hz3", 0.0);
    m.det_d = cfg.number_or("d_coeff", 0.0);
    m.det_r = cfg.number_or("r_exp", 5.0);

    m.gwd_omega_qi = two_pi * cfg.number_or("gwd_omega_qi_hz", 100.0);
    m.gwd_squeeze_db = cfg.number_or("gwd_squeeze_db", 10.0);
    m.gwd_c_q = cfg.number_or("gwd_c_q", 40.0);
    m.gwd_n_s = cfg.number_or("gwd_n_s", 0.0);
    m.gwd_omega_s_bare = two_pi * cfg.number_or("gwd_omega_s_hz", 76.0);
    m.gwd_readout = two_pi * cfg.number_or("gwd_readout_hz", 0.0);
    m.gwd_gamma_s = two_pi * cfg.number_or("gwd_gamma_s_hz", 0.0);
    m.gwd_phi = cfg.number_or("gwd_phi_rad", 0.0);

    m.mors_omega_qzs = two_pi * cfg.number_or("mors_omega_qzs_hz", 0.0);
    m.mors_linewidth = two_pi * cfg.number_or("mors_linewidth_hz", 0.0);
    return m;
}

}  // namespace spinspec
