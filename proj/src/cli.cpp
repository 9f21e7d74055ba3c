#include "spinspec/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "spinspec/core.hpp"
#include "spinspec/detuning.hpp"
#include "spinspec/fit.hpp"
#include "spinspec/gwd.hpp"
#include "spinspec/io.hpp"
#include "spinspec/mors.hpp"
#include "spinspec/squeeze.hpp"

namespace spinspec {

namespace {

// CSV table to --out or stdout; summary key = value lines to --summary or stderr.
struct Sink {
    std::ofstream file;
    std::ostream* os = nullptr;

    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os = &fallback;
        } else {
            file.open(path);
            if (!file) throw UsageError("cannot open output file: " + path);
            os = &file;
        }
    }
    std::ostream& out() { return *os; }
};

using Summary = std::vector<std::pair<std::string, std::string>>;

void write_summary(const Summary& rows, const std::string& path) {
    Sink sink(path, std::cerr);
    for (const auto& [key, value] : rows) sink.out() << key << " = " << value << "\n";
}

void add_num(Summary& rows, const std::string& key, double v) {
    rows.emplace_back(key, format_value(v));
}

double to_db(double sn_units) { return 10.0 * std::log10(sn_units); }

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string summary_path;
};

void add_common(CLI::App* sub, CommonOpts& c, bool config_required = true) {
    auto* opt = sub->add_option("--config", c.config_path, "key = value configuration file");
    opt->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--out", c.out_path, "CSV output path (default: stdout)");
    sub->add_option("--summary", c.summary_path, "summary output path (default: stderr)");
}

struct GridOpts {
    double fmin = 100.0;
    double fmax = 40000.0;
    std::size_t points = 2000;
};

void add_grid(CLI::App* sub, GridOpts& g, double fmin, double fmax, std::size_t points) {
    g.fmin = fmin;
    g.fmax = fmax;
    g.points = points;
    sub->add_option("--fmin", g.fmin, "grid start (Hz)");
    sub->add_option("--fmax", g.fmax, "grid end (Hz)");
    sub->add_option("--points", g.points, "grid points")->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
}

SpectrumFormat parse_format(const std::string& fmt) {
    if (fmt == "csv") return SpectrumFormat::Csv;
    if (fmt == "tsv") return SpectrumFormat::Tsv;
    throw UsageError("unknown spectrum format: " + fmt);
}

// ---------------------------------------------------------------- psd

struct PsdOpts {
    CommonOpts common;
    GridOpts grid;
    double phi = 0.0;
    bool phi_set = false;
    bool budget = false;
    double noise_rel = 0.0;
    std::uint64_t seed = 0;
};

void run_psd(const PsdOpts& o) {
    ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
    if (o.phi_set) mc.probe.phi = o.phi;
    const auto grid = linspace(o.grid.fmin, o.grid.fmax, o.grid.points);
    Spectrum s = psd_total(mc.params, mc.probe, mc.tensor, mc.s_bb, grid);

    if (o.noise_rel > 0.0) {
        std::mt19937_64 rng(o.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& v : s.values) v *= 1.0 + o.noise_rel * gauss(rng);
    }

    Sink sink(o.common.out_path, std::cout);
    if (o.budget) {
        sink.out() << "# frequency_hz,total,sn,qban,corr,tn,bb,dc\n";
        for (std::size_t i = 0; i < s.size(); ++i) {
            const NoiseBudget b =
                budget_terms(mc.params, mc.probe, mc.tensor, mc.s_bb, two_pi * s.freqs_hz[i]);
            sink.out() << format_value(s.freqs_hz[i]) << ',' << format_value(b.total()) << ','
                       << format_value(b.sn) << ',' << format_value(b.qban) << ','
                       << format_value(b.corr) << ',' << format_value(b.tn) << ','
                       << format_value(b.bb) << ',' << format_value(b.dc) << '\n';
        }
    } else {
        save_spectrum(s, sink.out());
    }

    Summary rows;
    add_num(rows, "n_points", static_cast<double>(s.size()));
    add_num(rows, "omega_s_khz", mc.params.omega_s / two_pi / 1e3);
    add_num(rows, "gamma_s_hz", mc.params.gamma_s() / two_pi);
    add_num(rows, "readout_khz", mc.params.readout_rate / two_pi / 1e3);
    add_num(rows, "n_s", mc.params.n_s);
    add_num(rows, "eta", mc.probe.eta);
    add_num(rows, "phi_rad", mc.probe.phi);
    write_summary(rows, o.common.summary_path);
}

// ---------------------------------------------------------------- fit

struct FitOpts {
    CommonOpts common;
    std::string data_path;
    std::string format = "csv";
    std::string model = "eq1";
    int components = 1;
    std::string free_list;
    std::vector<std::string> masks;
    std::vector<std::string> inits;
};

void run_fit(const FitOpts& o) {
    const ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
    const LoadedSpectrum loaded = load_spectrum(o.data_path, parse_format(o.format));
    for (const auto& w : loaded.warnings) std::cerr << "# warning: " << w << "\n";

    FitProblem prob;
    prob.data = loaded.spectrum;
    prob.data_has_negative = loaded.has_negative;
    if (o.model == "eq1")
        prob.model = FitModel::Eq1;
    else if (o.model == "eq1+dc")
        prob.model = FitModel::Eq1Dc;
    else if (o.model == "bb")
        prob.model = FitModel::MultiLorentzBb;
    else
        throw UsageError("unknown fit model: " + o.model + " (expected eq1, eq1+dc or bb)");
    prob.n_components = o.components;

    prob.init["omega_s_hz"] = mc.params.omega_s / two_pi;
    if (prob.model != FitModel::MultiLorentzBb) {
        prob.init["gamma_s_hz"] = mc.params.gamma_s() / two_pi;
        prob.init["readout_hz"] = mc.params.readout_rate / two_pi;
        prob.init["n_s"] = mc.params.n_s;
        prob.init["eta"] = mc.probe.eta;
        prob.init["phi_rad"] = mc.probe.phi;
        prob.init["s_bb"] = mc.s_bb;
    }
    if (prob.model == FitModel::Eq1Dc) {
        prob.init["a2_over_a1"] = mc.tensor.a2_over_a1;
        prob.init["dc_halfwidth_hz"] = mc.tensor.dc_halfwidth / two_pi;
        prob.init["dc_phase_sin2"] = mc.tensor.dc_phase == DcPhaseWeight::Sin2 ? 1.0 : 0.0;
    }
    if (prob.model == FitModel::MultiLorentzBb) {
        for (int c = 1; c <= o.components; ++c) {
            prob.init["bb_amp_" + std::to_string(c)] = 0.1;
            prob.init["bb_width_" + std::to_string(c)] =
                mc.params.gamma_s() / two_pi * std::pow(3.0, c - 1);
        }
    }
    for (const auto& ov : o.inits) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw UsageError("--init expects name=value, got: " + ov);
        prob.init[ov.substr(0, eq)] = std::stod(ov.substr(eq + 1));
    }

    prob.free_names = split_list(o.free_list, ',');

    if (!o.masks.empty()) {
        prob.weights.assign(prob.data.size(), 1.0);
        for (const auto& m : o.masks) {
            const auto colon = m.find(':');
            if (colon == std::string::npos) throw UsageError("--mask expects lo:hi, got: " + m);
            const double lo = std::stod(m.substr(0, colon));
            const double hi = std::stod(m.substr(colon + 1));
            for (std::size_t i = 0; i < prob.data.size(); ++i)
                if (prob.data.freqs_hz[i] >= lo && prob.data.freqs_hz[i] <= hi)
                    prob.weights[i] = 0.0;
        }
    }

    const FitReport rep = fit_spectrum(prob);

    std::map<std::string, double> fitted;
    for (const auto& [name, p] : rep.params) fitted[name] = p.value;
    if (prob.init.count("dc_phase_sin2")) fitted["dc_phase_sin2"] = prob.init["dc_phase_sin2"];
    const auto model_vals = eval_model(prob.model, prob.n_components, fitted, prob.data.freqs_hz);

    Sink sink(o.common.out_path, std::cout);
    sink.out() << "# frequency_hz,data,model,residual\n";
    for (std::size_t i = 0; i < prob.data.size(); ++i)
        sink.out() << format_value(prob.data.freqs_hz[i]) << ','
                   << format_value(prob.data.values[i]) << ',' << format_value(model_vals[i])
                   << ',' << format_value(prob.data.values[i] - model_vals[i]) << '\n';

    Summary rows;
    rows.emplace_back("converged", rep.converged ? "1" : "0");
    add_num(rows, "iterations", rep.iterations);
    add_num(rows, "rss", rep.residual_rss);
    for (const auto& name : model_parameter_names(prob.model, prob.n_components)) {
        add_num(rows, name, rep.params.at(name).value);
        add_num(rows, name + "_sigma", rep.params.at(name).sigma);
    }
    if (!rep.projected.empty()) {
        std::string joined;
        for (const auto& n : rep.projected) joined += (joined.empty() ? "" : ",") + n;
        rows.emplace_back("projected", joined);
    }
    for (const auto& w : rep.warnings) rows.emplace_back("warning", w);
    write_summary(rows, o.common.summary_path);
    if (!rep.converged) throw FitError("fit did not converge");
}

// ---------------------------------------------------------------- squeeze

struct SqueezeOpts {
    CommonOpts common;
    double wmin_khz = 0.0;
    double wmax_khz = 0.0;
    int phi_points = 201;
    int omega_points = 201;
};

void run_squeeze(const SqueezeOpts& o) {
    const ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
    SearchDomain dom = default_search_domain(mc.params);
    if (o.wmin_khz > 0.0) dom.omega_min = two_pi * 1e3 * o.wmin_khz;
    if (o.wmax_khz > 0.0) dom.omega_max = two_pi * 1e3 * o.wmax_khz;
    dom.phi_points = o.phi_points;
    dom.omega_points = o.omega_points;

    const SqueezeResult r = optimize_squeezing(mc.params, mc.probe, mc.tensor, mc.s_bb, dom);

    ProbeConfig probe_opt = mc.probe;
    probe_opt.phi = r.phi_opt;
    const auto grid = linspace(dom.omega_min / two_pi, dom.omega_max / two_pi, 1001);
    const Spectrum s = psd_total(mc.params, probe_opt, mc.tensor, mc.s_bb, grid);
    Sink sink(o.common.out_path, std::cout);
    save_spectrum(s, sink.out(), "frequency_hz,psd_sn_at_phi_opt");

    Summary rows;
    add_num(rows, "phi_opt_rad", r.phi_opt);
    add_num(rows, "omega_opt_khz", r.omega_opt / two_pi / 1e3);
    add_num(rows, "s_min", r.s_min);
    add_num(rows, "s_min_db", to_db(r.s_min));
    add_num(rows, "analytic_bound", r.analytic_bound);
    add_num(rows, "analytic_bound_db", to_db(r.analytic_bound));
    add_num(rows, "c_q", cooperativity(mc.params));
    write_summary(rows, o.common.summary_path);
}

// ---------------------------------------------------------------- shift

struct ShiftOpts {
    CommonOpts common;
    GridOpts grid;
    bool grid_set = false;
    double phi = 0.0;
    bool phi_set = false;
    bool full = false;
};

void run_shift(const ShiftOpts& o) {
    ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
    if (o.phi_set) mc.probe.phi = o.phi;

    const EffectiveOscillator eff = effective_oscillator(mc.params, mc.probe.phi);

    double fmin = o.grid.fmin;
    double fmax = o.grid.fmax;
    if (!o.grid_set) {
        const double f0 = std::abs(mc.params.omega_s) / two_pi;
        fmin = 0.4 * f0;
        fmax = 1.6 * f0;
    }
    const auto grid = linspace(fmin, fmax, o.grid.points);
    const Spectrum s =
        force_normalized_spectrum(mc.params, mc.probe, mc.tensor, mc.s_bb, !o.full, grid);
    Sink sink(o.common.out_path, std::cout);
    save_spectrum(s, sink.out(), "frequency_hz,force_referenced_psd");

    Summary rows;
    add_num(rows, "phi_rad", mc.probe.phi);
    add_num(rows, "omega_eff_khz", eff.omega_eff / two_pi / 1e3);
    add_num(rows, "shift_khz", (eff.omega_eff - mc.params.omega_s) / two_pi / 1e3);
    add_num(rows, "readout_eff_khz", eff.readout_eff / two_pi / 1e3);
    add_num(rows, "gamma_s_hz", eff.gamma_s / two_pi);
    write_summary(rows, o.common.summary_path);
}

// ---------------------------------------------------------------- detune

struct DetuneOpts {
    CommonOpts common;
    double dmin_ghz = 1.0;
    double dmax_ghz = 8.0;
    std::size_t points = 200;
    double a_hz3 = -1.0;
    double c_hz3 = -1.0;
    double d_coeff = -1.0;
    double r_exp = -1.0;
    double gamma0_hz = -1.0;
    double eta = -1.0;
};

void run_detune(const DetuneOpts& o) {
    double a_hz3 = o.a_hz3;
    double c_hz3 = o.c_hz3;
    double d_coeff = o.d_coeff;
    double r_exp = o.r_exp;
    double gamma0_hz = o.gamma0_hz;
    double eta = o.eta;
    if (!o.common.config_path.empty()) {
        const ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
        if (a_hz3 < 0.0) a_hz3 = mc.det_a_hz3;
        if (c_hz3 < 0.0) c_hz3 = mc.det_c_hz3;
        if (d_coeff < 0.0) d_coeff = mc.det_d;
        if (r_exp < 0.0) r_exp = mc.det_r;
        if (gamma0_hz < 0.0) gamma0_hz = mc.params.gamma_s0 / two_pi;
        if (eta < 0.0) eta = mc.probe.eta;
    }
    if (a_hz3 < 0.0 || c_hz3 < 0.0 || d_coeff < 0.0 || gamma0_hz < 0.0)
        throw UsageError("detune needs coefficients via --config or flags");
    if (r_exp < 0.0) r_exp = 5.0;
    if (eta < 0.0) eta = 1.0;

    // Ordinary-frequency coefficients from the file become angular here.
    DetuningScaling sc;
    sc.a_coeff = a_hz3 * two_pi * two_pi * two_pi;
    sc.c_coeff = c_hz3 * two_pi * two_pi * two_pi;
    sc.gamma_s0 = two_pi * gamma0_hz;
    sc.d_coeff = d_coeff * std::pow(two_pi, r_exp);
    sc.r_exp = r_exp;
    sc.eta = eta;

    const double lo = two_pi * 1e9 * o.dmin_ghz;
    const double hi = two_pi * 1e9 * o.dmax_ghz;
    const auto [delta_opt, s_min] = optimal_detuning(sc, lo, hi);

    Sink sink(o.common.out_path, std::cout);
    sink.out() << "# delta_ghz,s_s_db\n";
    for (std::size_t i = 0; i < o.points; ++i) {
        const double d = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(o.points - 1);
        sink.out() << format_value(d / two_pi / 1e9) << ','
                   << format_value(to_db(squeezing_vs_detuning(sc, d))) << '\n';
    }

    Summary rows;
    add_num(rows, "delta_opt_ghz", delta_opt / two_pi / 1e9);
    add_num(rows, "s_min", s_min);
    add_num(rows, "s_min_db", to_db(s_min));
    add_num(rows, "readout_opt_hz", readout_at(sc, delta_opt) / two_pi);
    add_num(rows, "damping_opt_hz", damping_at(sc, delta_opt) / two_pi);
    write_summary(rows, o.common.summary_path);
}

// ---------------------------------------------------------------- mors

struct MorsOpts {
    CommonOpts common;
    std::string data_path;
    std::string format = "csv";
};

void run_mors(const MorsOpts& o) {
    const ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
    if (mc.mors_omega_qzs <= 0.0 || mc.mors_linewidth <= 0.0)
        throw UsageError("mors needs mors_omega_qzs_hz and mors_linewidth_hz in the config");

    ZeemanLadder init;
    init.omega_s = mc.params.omega_s;
    init.omega_qzs = mc.mors_omega_qzs;
    init.linewidth = mc.mors_linewidth;

    const LoadedSpectrum loaded = load_spectrum(o.data_path, parse_format(o.format));
    const MorsFitResult res = fit_mors(loaded.spectrum, init);

    const Spectrum model = mors_spectrum(res.ladder, res.pops, loaded.spectrum.freqs_hz);
    Sink sink(o.common.out_path, std::cout);
    sink.out() << "# frequency_hz,data,model\n";
    for (std::size_t i = 0; i < model.size(); ++i)
        sink.out() << format_value(model.freqs_hz[i]) << ','
                   << format_value(loaded.spectrum.values[i]) << ','
                   << format_value(model.values[i]) << '\n';

    Summary rows;
    add_num(rows, "omega_s_khz", res.ladder.omega_s / two_pi / 1e3);
    add_num(rows, "omega_qzs_hz", res.ladder.omega_qzs / two_pi);
    add_num(rows, "linewidth_hz", res.ladder.linewidth / two_pi);
    static const char* names[9] = {"p_m4", "p_m3", "p_m2", "p_m1", "p_0",
                                   "p_p1", "p_p2", "p_p3", "p_p4"};
    for (int i = 0; i < 9; ++i) add_num(rows, names[i], res.pops.p[static_cast<std::size_t>(i)]);
    const double pol = polarization(res.pops);
    add_num(rows, "polarization", pol);
    add_num(rows, "n_s_negative_mass", thermal_occupancy(res.pops, MassSign::Negative));
    add_num(rows, "n_s_positive_mass", thermal_occupancy(res.pops, MassSign::Positive));
    try {
        const MassSign sign = classify_mass(res.pops);
        rows.emplace_back("mass_sign", sign == MassSign::Negative ? "negative" : "positive");
        add_num(rows, "n_s", thermal_occupancy(res.pops, sign));
    } catch (const IndeterminateMassError&) {
        rows.emplace_back("mass_sign", "indeterminate");
    }
    add_num(rows, "rss", res.residual_rss);
    add_num(rows, "iterations", res.iterations);
    write_summary(rows, o.common.summary_path);
}

// ---------------------------------------------------------------- gwd

struct GwdOpts {
    CommonOpts common;
    double fmin = 10.0;
    double fmax = 1e4;
    std::size_t points = 400;
    double thermal_ns = 2.0;
};

void run_gwd(const GwdOpts& o) {
    GwdConfig base;
    if (!o.common.config_path.empty()) {
        const ModelConfig mc = parse_model_config(Config::load(o.common.config_path));
        base.omega_qi = mc.gwd_omega_qi;
        base.squeeze_db = mc.gwd_squeeze_db;
        base.c_q = mc.gwd_c_q;
        base.n_s = mc.gwd_n_s;
        base.omega_s_bare = mc.gwd_omega_s_bare;
        if (mc.gwd_readout > 0.0) {
            OscillatorParams spin;
            spin.omega_s = mc.gwd_omega_s_bare;
            spin.gamma_s0 = mc.gwd_gamma_s;
            spin.readout_rate = mc.gwd_readout;
            base.spin = effective_oscillator(spin, mc.gwd_phi);
        }
    } else {
        base.squeeze_db = 10.0;
        base.c_q = 40.0;
    }

    GwdConfig plain = base;
    plain.squeeze_db = 0.0;
    GwdConfig thermal = base;
    thermal.n_s = o.thermal_ns;

    Sink sink(o.common.out_path, std::cout);
    sink.out() << "# frequency_hz,qn_limited_db,squeezed_input_db,joint_db,joint_thermal_db\n";
    const double lf0 = std::log10(o.fmin);
    const double lf1 = std::log10(o.fmax);
    for (std::size_t i = 0; i < o.points; ++i) {
        const double f =
            std::pow(10.0, lf0 + (lf1 - lf0) * static_cast<double>(i) / static_cast<double>(o.points - 1));
        const double w = two_pi * f;
        sink.out() << format_value(f) << ',' << format_value(to_db(interferometer_noise(w, plain)))
                   << ',' << format_value(to_db(interferometer_noise(w, base))) << ','
                   << format_value(to_db(joint_noise(w, base))) << ','
                   << format_value(to_db(joint_noise(w, thermal))) << '\n';
    }

    Summary rows;
    add_num(rows, "omega_qi_hz", base.omega_qi / two_pi);
    add_num(rows, "squeeze_db", base.squeeze_db);
    add_num(rows, "c_q", base.c_q);
    add_num(rows, "c_q_eff", base.effective_cooperativity());
    add_num(rows, "thermal_n_s", o.thermal_ns);
    rows.emplace_back("mode", base.spin.has_value() ? "mismatch" : "matched");
    write_summary(rows, o.common.summary_path);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"spin-oscillator quantum noise spectra: modeling, fitting, optimization"};
    app.require_subcommand(1);

    PsdOpts psd;
    auto* psd_cmd = app.add_subcommand("psd", "evaluate the noise-model spectrum from a config");
    add_common(psd_cmd, psd.common);
    add_grid(psd_cmd, psd.grid, 100.0, 40000.0, 2000);
    psd_cmd->add_option("--phi", psd.phi, "override the homodyne phase (rad)")
        ->each([&psd](const std::string&) { psd.phi_set = true; });
    psd_cmd->add_flag("--budget", psd.budget, "emit the per-term noise decomposition");
    psd_cmd->add_option("--noise-rel", psd.noise_rel, "relative synthetic noise amplitude");
    psd_cmd->add_option("--seed", psd.seed, "seed for synthetic noise");
    psd_cmd->callback([&psd] { run_psd(psd); });

    FitOpts fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a spectral model to a CSV spectrum");
    add_common(fit_cmd, fit.common);
    fit_cmd->add_option("--data", fit.data_path, "spectrum file")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--format", fit.format, "data format: csv or tsv");
    fit_cmd->add_option("--model", fit.model, "model: eq1, eq1+dc or bb");
    fit_cmd->add_option("--components", fit.components, "Lorentzian components for the bb model");
    fit_cmd->add_option("--free", fit.free_list, "comma-separated free parameter names")->required();
    fit_cmd->add_option("--mask", fit.masks, "lo:hi window (Hz) excluded from the fit");
    fit_cmd->add_option("--init", fit.inits, "name=value initial override");
    fit_cmd->callback([&fit] { run_fit(fit); });

    SqueezeOpts squeeze;
    auto* squeeze_cmd = app.add_subcommand("squeeze", "optimize ponderomotive squeezing over (phi, omega)");
    add_common(squeeze_cmd, squeeze.common);
    squeeze_cmd->add_option("--wmin-khz", squeeze.wmin_khz, "search window start (kHz)");
    squeeze_cmd->add_option("--wmax-khz", squeeze.wmax_khz, "search window end (kHz)");
    squeeze_cmd->add_option("--phi-points", squeeze.phi_points, "coarse grid points in phi");
    squeeze_cmd->add_option("--omega-points", squeeze.omega_points, "coarse grid points in omega");
    squeeze_cmd->callback([&squeeze] { run_squeeze(squeeze); });

    ShiftOpts shift;
    auto* shift_cmd =
        app.add_subcommand("shift", "effective oscillator and force-normalized spectrum");
    add_common(shift_cmd, shift.common);
    add_grid(shift_cmd, shift.grid, 100.0, 40000.0, 2001);
    shift_cmd->get_option("--fmin")->each([&shift](const std::string&) { shift.grid_set = true; });
    shift_cmd->get_option("--fmax")->each([&shift](const std::string&) { shift.grid_set = true; });
    shift_cmd->add_option("--phi", shift.phi, "homodyne phase (rad); default from config")
        ->each([&shift](const std::string&) { shift.phi_set = true; });
    shift_cmd->add_flag("--full", shift.full, "normalize the full budget, not just SN+QBAN+corr");
    shift_cmd->callback([&shift] { run_shift(shift); });

    DetuneOpts detune;
    auto* detune_cmd = app.add_subcommand("detune", "squeezing vs optical detuning and its optimum");
    add_common(detune_cmd, detune.common, /*config_required=*/false);
    detune_cmd->add_option("--dmin-ghz", detune.dmin_ghz, "range start (GHz)");
    detune_cmd->add_option("--dmax-ghz", detune.dmax_ghz, "range end (GHz)");
    detune_cmd->add_option("--points", detune.points, "table rows");
    detune_cmd->add_option("--a-hz3", detune.a_hz3, "readout coefficient A (Hz^3)");
    detune_cmd->add_option("--c-hz3", detune.c_hz3, "broadening coefficient C (Hz^3)");
    detune_cmd->add_option("--d-coeff", detune.d_coeff, "DC-noise coefficient D (Hz^r)");
    detune_cmd->add_option("--r-exp", detune.r_exp, "DC-noise exponent r in [4,6]");
    detune_cmd->add_option("--gamma0-hz", detune.gamma0_hz, "intrinsic damping (Hz)");
    detune_cmd->add_option("--eta", detune.eta, "detection efficiency");
    detune_cmd->callback([&detune] { run_detune(detune); });

    MorsOpts mors;
    auto* mors_cmd = app.add_subcommand("mors", "fit a Zeeman-resolved spectrum; report populations");
    add_common(mors_cmd, mors.common);
    mors_cmd->add_option("--data", mors.data_path, "spectrum file")->required()->check(CLI::ExistingFile);
    mors_cmd->add_option("--format", mors.format, "data format: csv or tsv");
    mors_cmd->callback([&mors] { run_mors(mors); });

    GwdOpts gwd;
    auto* gwd_cmd = app.add_subcommand("gwd", "interferometer + spin joint noise projection");
    add_common(gwd_cmd, gwd.common, /*config_required=*/false);
    gwd_cmd->add_option("--fmin", gwd.fmin, "log grid start (Hz)");
    gwd_cmd->add_option("--fmax", gwd.fmax, "log grid end (Hz)");
    gwd_cmd->add_option("--points", gwd.points, "log grid points");
    gwd_cmd->add_option("--thermal-ns", gwd.thermal_ns, "occupancy of the thermal companion curve");
    gwd_cmd->callback([&gwd] { run_gwd(gwd); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("spinspec");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace spinspec
