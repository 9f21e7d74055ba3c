#pragma once

// Spectrum CSV ingestion/emission and flat key = value configuration files.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spinspec/types.hpp"

namespace spinspec {

enum class SpectrumFormat { Csv, Tsv };

struct LoadedSpectrum {
    Spectrum spectrum;
    bool has_negative = false;          // measured spectra can dip below zero
    std::vector<std::string> warnings;
};

// Two numeric columns (frequency_hz, psd in shot-noise units); lines starting
// with '#' are ignored. Strictly increasing frequency is enforced; parse
// failures report the offending line.
LoadedSpectrum load_spectrum(const std::string& path, SpectrumFormat format = SpectrumFormat::Csv);
LoadedSpectrum parse_spectrum(std::istream& in, SpectrumFormat format = SpectrumFormat::Csv,
                              const std::string& origin = "<stream>");

void save_spectrum(const Spectrum& s, std::ostream& out,
                   const std::string& header = "frequency_hz,psd_sn");
void save_spectrum(const Spectrum& s, const std::string& path,
                   const std::string& header = "frequency_hz,psd_sn");

// Value formatted with 9 significant digits, the numeric output convention
// used everywhere.
std::string format_value(double v);

// Flat key = value file; '#' starts a comment, blank lines ignored. Keys are
// checked against the known-key registry so typos fail loudly.
class Config {
public:
    static Config load(const std::string& path);
    static Config parse(std::istream& in, const std::string& origin = "<stream>");

    bool has(const std::string& key) const;
    double number(const std::string& key) const;               // required
    double number_or(const std::string& key, double fallback) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;

private:
    std::map<std::string, std::string> kv_;
    std::string origin_;
};

// Domain objects assembled from a config file. Frequencies in files carry
// unit-suffixed keys (omega_s_khz, gamma_s0_hz, delta_ghz, ...); everything
// is converted to angular rad/s here at the boundary.
struct ModelConfig {
    OscillatorParams params;
    ProbeConfig probe;
    TensorConfig tensor;
    double s_bb = 0.0;

    // Detuning planner (coefficients in ordinary-frequency units in the file).
    double det_a_hz3 = 0.0;
    double det_c_hz3 = 0.0;
    double det_d = 0.0;
    double det_r = 5.0;

    // Interferometer projection.
    double gwd_omega_qi = two_pi * 100.0;
    double gwd_squeeze_db = 10.0;
    double gwd_c_q = 40.0;
    double gwd_n_s = 0.0;
    double gwd_omega_s_bare = two_pi * 76.0;
    double gwd_readout = 0.0;   // > 0 enables mismatch mode
    double gwd_gamma_s = 0.0;
    double gwd_phi = 0.0;

    // Zeeman ladder initialization for the MORS fit.
    double mors_omega_qzs = 0.0;
    double mors_linewidth = 0.0;
};

ModelConfig parse_model_config(const Config& cfg);

}  // namespace spinspec
