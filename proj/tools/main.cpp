// optocorr: command line front end.
//
// Exit status: 0 ok, 2 usage, 3 invalid input (config, parameters, bands),
// 4 a requested check failed (verify, --expect-*), 1 anything else.

#include <optocorr/asymmetry.hpp>
#include <optocorr/config.hpp>
#include <optocorr/constants.hpp>
#include <optocorr/error.hpp>
#include <optocorr/io.hpp>
#include <optocorr/metrology.hpp>
#include <optocorr/report.hpp>
#include <optocorr/spectra.hpp>
#include <optocorr/stochastic.hpp>
#include <optocorr/welch.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace optocorr;
using constants::pi;
using constants::two_pi;

namespace {

constexpr int kUsage = 2;
constexpr int kInvalid = 3;
constexpr int kCheckFailed = 4;

struct Options {
    std::string config;
    std::string out_dir;
    unsigned threads = 0;

    // spectrum
    double theta = 0;
    std::optional<double> fmin, fmax;
    std::optional<std::size_t> bins;
    std::string output;
    std::string model = "homodyne";

    // asymmetry / scaling
    std::optional<std::size_t> theta_points;
    std::string method;
    std::string measured;
    bool no_correct = false;
    bool expect_unity = false;
    std::vector<double> powers;
    std::vector<double> expect_exponent;

    // force
    std::string theta_spec = "opt";
    std::optional<double> power;
    std::vector<double> tones;

    // simulate / verify
    std::optional<std::uint64_t> seed;
};

// Thrown when an --expect style check does not hold.
struct CheckFailed : Error {
    using Error::Error;
};

struct Session {
    RunConfig cfg;
    fs::path out;
    ResultReport report;

    Session(const Options& o, const std::string& command)
    {
        cfg = load_config(o.config);
        if (o.power)
            cfg.drive.power_in = *o.power;
        if (o.seed)
            cfg.simulation.seed = *o.seed;
        cfg.validate();
        out = o.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(o.out_dir);
        fs::create_directories(out);
        report.command = command;
        report.config = cfg;
        report.derived = derived_entries(cfg.derived());
        set_warning_handler([this](const std::string& m) {
            report.warnings.push_back(m);
            std::cerr << "warning: " << m << '\n';
        });
    }

    ~Session() { set_warning_handler({}); }
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    void table(const Table& t)
    {
        report.tables.push_back(t);
        write_table(t, (out / (t.name + ".csv")).string());
    }

    void finish()
    {
        const auto path = out / (report.command + ".json");
        write_report(report, path.string());
        std::cerr << "report: " << path.string() << '\n';
    }
};

void print_result(const std::string& key, double v) { std::printf("%-28s %.10g\n", key.c_str(), v); }

std::vector<double> frequency_grid(const Options& o, const RunConfig& c)
{
    const double om = c.device.omega_m;
    const double lo = o.fmin ? two_pi * *o.fmin : c.analysis.freq_min.value_or(0.95 * om);
    const double hi = o.fmax ? two_pi * *o.fmax : c.analysis.freq_max.value_or(1.05 * om);
    const std::size_t n = o.bins.value_or(c.analysis.bins);
    if (!(lo > 0) || !(hi > lo))
        throw ValidationError("fmin/fmax", "need 0 < fmin < fmax");
    if (n < 2)
        throw ValidationError("bins", "need at least 2 bins");
    return linear_grid(lo, hi, n);
}

std::vector<double> thetas_for(const Options& o, const RunConfig& c)
{
    return theta_grid(o.theta_points.value_or(c.analysis.theta_points));
}

Table curve_table(const std::string& name, const AsymmetryCurve& curve)
{
    Table t{name, {"theta_rad", "theta_deg", "r_theta"}, {}};
    for (std::size_t i = 0; i < curve.thetas.size(); ++i)
        t.add_row({curve.thetas[i], curve.thetas[i] * 180 / pi, curve.ratios[i]});
    return t;
}

AsymmetryCurve model_sweep(const RunConfig& c, const std::vector<double>& thetas, const std::string& method)
{
    const auto dq = c.derived();
    if (method == "closed")
        return closed_curve(dq, c.analysis.band, thetas);
    if (method == "band" || method == "corrected")
        return model_curve(dq, c.susceptibility(), c.analysis.band, thetas, method == "corrected");
    throw ValidationError("method", "expected closed, band or corrected, got '" + method + "'");
}

void add_delta_r(Session& s, const AsymmetryCurve& curve)
{
    const auto d = delta_r(curve);
    s.report.results.push_back({"delta_r", d.value});
    s.report.results.push_back({"theta_max_rad", d.theta_max});
    s.report.results.push_back({"theta_min_rad", d.theta_min});
    s.report.results.push_back({"delta_r_asymptotic", delta_r_asymptotic(s.cfg.derived())});
}

// --- subcommands ----------------------------------------------------------

void cmd_derive(const Options& o)
{
    Session s(o, "derive");
    for (const auto& [k, v] : s.report.derived)
        print_result(k, v);
    if (s.cfg.derived().coop > 0)
        print_result("n_imp", imprecision_occupation(s.cfg.derived()));
    s.finish();
}

void cmd_spectrum(const Options& o)
{
    Session s(o, "spectrum");
    const auto dq = s.cfg.derived();
    const auto chi = s.cfg.susceptibility();
    const auto grid = frequency_grid(o, s.cfg);
    Spectrum spec;
    if (o.model == "homodyne")
        spec = homodyne_spectrum(dq, chi, o.theta, grid);
    else if (o.model == "extended")
        spec = extended_spectrum(dq, chi, o.theta, grid);
    else if (o.model == "displacement")
        spec = displacement_spectrum(dq, chi, grid);
    else
        throw ValidationError("model", "expected homodyne, extended or displacement, got '" + o.model + "'");
    const fs::path file = o.output.empty() ? s.out / "spectrum.csv" : fs::path(o.output);
    write_spectrum(spec, file.string());
    std::cerr << "spectrum: " << file.string() << '\n';
    s.report.results.push_back({"theta_rad", o.theta});
    s.report.results.push_back({"bins", double(grid.size())});
    s.finish();
}

AsymmetryCurve measured_curve(const Options& o, const RunConfig& c)
{
    std::vector<std::pair<double, Spectrum>> specs;
    for (const auto& e : fs::directory_iterator(o.measured)) {
        if (!e.is_regular_file())
            continue;
        const auto ext = e.path().extension().string();
        if (ext != ".csv" && ext != ".tsv" && ext != ".txt" && ext != ".dat")
            continue;
        auto sp = read_spectrum(e.path().string());
        if (!sp.theta)
            throw ValidationError("theta_rad", "spectrum '" + e.path().string() + "' has no theta_rad metadata");
        specs.emplace_back(*sp.theta, std::move(sp));
    }
    if (specs.empty())
        throw ValidationError("measured", "no spectrum files in '" + o.measured + "'");
    std::sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    AsymmetryCurve curve;
    curve.band = c.analysis.band;
    curve.corrected = !o.no_correct;
    const auto chi = c.susceptibility();
    const double factor = curve.corrected ? susceptibility_correction(chi, c.analysis.band) : 1.0;
    for (const auto& [th, sp] : specs) {
        const double raw = r_theta_band(sp, sp, c.analysis.band, c.device.omega_m);
        // no motion is transduced at sin(theta) = 0, so there is no susceptibility to correct
        curve.thetas.push_back(th);
        curve.ratios.push_back(std::sin(th) == 0 ? raw : raw * factor);
    }
    return curve;
}

void cmd_asymmetry(const Options& o)
{
    Session s(o, "asymmetry");
    const std::string method = o.method.empty() ? "closed" : o.method;
    const auto curve = o.measured.empty() ? model_sweep(s.cfg, thetas_for(o, s.cfg), method) : measured_curve(o, s.cfg);
    s.table(curve_table("asymmetry", curve));
    if (curve.thetas.size() >= 2)
        add_delta_r(s, curve);
    for (const auto& [k, v] : s.report.results)
        print_result(k, v);
    s.finish();
    if (o.expect_unity) {
        bool found = false;
        for (std::size_t i = 0; i < curve.thetas.size(); ++i)
            if (std::abs(curve.thetas[i] - pi / 2) < 1e-12)
                found = found || std::abs(curve.ratios[i] - 1) < 1e-9;
        if (!found)
            throw CheckFailed("no theta = pi/2 row with R = 1");
    }
}

void cmd_scaling(const Options& o)
{
    Session s(o, "scaling");
    const std::string method = o.method.empty() ? "closed" : o.method;
    const auto powers = o.powers.empty() ? s.cfg.analysis.powers : o.powers;
    if (powers.empty())
        throw ValidationError("powers", "no powers given (analysis.powers_w or --powers)");
    const auto thetas = thetas_for(o, s.cfg);
    Table t{"scaling", {"power_w", "delta_r", "delta_r_asymptotic", "theta_max_rad", "theta_min_rad"}, {}};
    std::vector<double> drs;
    for (double p : powers) {
        auto c = s.cfg;
        c.drive.power_in = p;
        c.validate();
        const auto d = delta_r(model_sweep(c, thetas, method));
        drs.push_back(d.value);
        t.add_row({p, d.value, delta_r_asymptotic(c.derived()), d.theta_max, d.theta_min});
    }
    s.table(t);
    const auto fit = fit_power_scaling(powers, drs);
    s.report.results = {{"exponent", fit.exponent},
                        {"exponent_stderr", fit.exponent_stderr},
                        {"amplitude_at_1w", fit.amplitude},
                        {"r_squared", fit.r_squared}};
    for (const auto& [k, v] : s.report.results)
        print_result(k, v);
    s.finish();
    if (!o.expect_exponent.empty()) {
        if (o.expect_exponent.size() != 2)
            throw ValidationError("expect-exponent", "expected VALUE,TOLERANCE");
        if (std::abs(fit.exponent - o.expect_exponent[0]) > o.expect_exponent[1])
            throw CheckFailed("fitted exponent " + std::to_string(fit.exponent) + " outside "
                              + std::to_string(o.expect_exponent[0]) + " +/- " + std::to_string(o.expect_exponent[1]));
    }
}

void cmd_force_budget(const Options& o)
{
    Session s(o, "force_budget");
    const auto dq = s.cfg.derived();
    const auto chi = s.cfg.susceptibility();
    const auto grid = frequency_grid(o, s.cfg);
    const auto& tones = s.cfg.simulation.injected_tones;
    ForceBudget b;
    if (o.theta_spec == "opt") {
        b = force_budget_opt(dq, chi, grid, tones);
    } else {
        double th = 0;
        try {
            th = std::stod(o.theta_spec);
        } catch (const std::exception&) {
            throw ValidationError("theta", "expected a number in rad or 'opt', got '" + o.theta_spec + "'");
        }
        b = force_budget(dq, chi, th, grid, tones);
    }
    auto f = [](double v) { return psd_to_file(SpectrumNorm::ForcePSD, v); };
    Table t{"force_budget",
            {"freq_hz", "s_ext_N2_per_Hz", "s_th_N2_per_Hz", "s_qba_N2_per_Hz", "s_imp_N2_per_Hz", "s_corr_N2_per_Hz",
             "total_N2_per_Hz", "theta_rad"},
            {}};
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.add_row({grid[i] / two_pi, f(b.s_ext[i]), f(b.s_th[i]), f(b.s_qba[i]), f(b.s_imp[i]), f(b.s_corr[i]),
                   f(b.total[i]), b.theta[i]});
        if (b.total[i] < b.total[best])
            best = i;
    }
    s.table(t);
    double xi_max = 1;
    for (double w : grid)
        xi_max = std::max(xi_max, xi_thermal_opt(dq, chi, w));
    s.report.results = {{"min_total_N2_per_Hz", f(b.total[best])},
                        {"min_total_freq_hz", grid[best] / two_pi},
                        {"xi_thermal_max", xi_max}};
    for (const auto& [k, v] : s.report.results)
        print_result(k, v);
    s.finish();
}

void cmd_force_sn(const Options& o)
{
    Session s(o, "force_sn");
    const auto dq = s.cfg.derived();
    const auto chi = s.cfg.susceptibility();
    const auto& a = s.cfg.analysis;
    const double center = s.cfg.tone_center();
    double f_plus = center + a.tone_offset, f_minus = center - a.tone_offset;
    if (!o.tones.empty()) {
        if (o.tones.size() != 2)
            throw ValidationError("tones", "expected two tone frequencies in Hz");
        f_minus = two_pi * std::min(o.tones[0], o.tones[1]);
        f_plus = two_pi * std::max(o.tones[0], o.tones[1]);
    }
    a.sn_bands.validate();
    const double reach = a.sn_bands.noise_offset + a.sn_bands.noise_width;
    const double step = std::min(two_pi * 10.0, a.sn_bands.tone_width / 50);
    // grid aligned so the lower tone sits on a bin
    const double lo = f_minus - std::ceil(reach / step) * step, hi = f_plus + reach;
    const std::size_t n = std::size_t(std::ceil((hi - lo) / step)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lo + double(i) * step;
    if (std::fmod(f_plus - lo, step) > 1e-6 * step && step - std::fmod(f_plus - lo, step) > 1e-6 * step)
        warn("upper tone falls between grid bins; it is assigned to the nearest one");

    auto power_of = [&](double f) {
        return a.tone_power ? *a.tone_power : tone_power_for_snr(dq, chi, grid, f, a.sn_bands, a.tone_snr);
    };
    const ForceTone up{f_plus, power_of(f_plus)}, dn{f_minus, power_of(f_minus)};
    const double ref = sn_ratio_closed(dq, chi, pi / 2, up, dn);

    Table t{"force_sn", {"theta_rad", "theta_deg", "sn_plus", "sn_minus", "sn_ratio", "sn_ratio_closed"}, {}};
    double peak = 0, peak_theta = 0, peak_closed = 0;
    for (double th : thetas_for(o, s.cfg)) {
        if (std::sin(th) == 0)
            continue;
        auto spec = homodyne_spectrum(dq, chi, th, grid);
        add_tones_homodyne(spec, dq, chi, th, {up, dn});
        const double sp = sn_band(spec, up.freq, a.sn_bands), sm = sn_band(spec, dn.freq, a.sn_bands);
        const double r = (sp - 1) / (sm - 1);
        const double closed = sn_ratio_closed(dq, chi, th, up, dn) / ref;
        t.add_row({th, th * 180 / pi, sp, sm, r, closed});
        const double dev = std::max(r, 1 / r) - 1;
        if (dev > peak) {
            peak = dev;
            peak_theta = th;
            peak_closed = std::max(closed, 1 / closed) - 1;
        }
    }
    s.table(t);
    s.report.results = {{"tone_plus_hz", up.freq / two_pi},  {"tone_minus_hz", dn.freq / two_pi},
                        {"tone_plus_power_n2", up.power},    {"tone_minus_power_n2", dn.power},
                        {"peak_improvement", peak},          {"peak_theta_rad", peak_theta},
                        {"peak_improvement_closed", peak_closed}};
    for (const auto& [k, v] : s.report.results)
        print_result(k, v);
    s.finish();
}

std::string theta_tag(double th)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.1fdeg", th < 0 ? "m" : "", std::abs(th) * 180 / pi);
    return buf;
}

SimulatedSpectra run_simulation(Session& s, const Options& o)
{
    const auto& sc = s.cfg.simulation;
    if (sc.theta_list.empty())
        throw ValidationError("simulation.thetas_deg", "no LO phases to analyse");
    s.report.seed = sc.seed;
    std::cerr << "simulating " << sc.n_trajectories << " x " << sc.samples() << " samples\n";
    auto sim = simulate_spectra(s.cfg.device, s.cfg.drive, sc, false, o.threads);
    s.report.results.push_back({"segments", double(sim.total.segments())});
    s.report.results.push_back({"effective_averages", sim.total.effective_averages()});
    s.report.results.push_back({"segment_length", double(sim.total.segment_length())});
    return sim;
}

void cmd_simulate(const Options& o)
{
    Session s(o, "simulate");
    const auto sim = run_simulation(s, o);
    for (double th : s.cfg.simulation.theta_list) {
        const auto file = s.out / ("sim_theta_" + theta_tag(th) + ".csv");
        write_spectrum(sim.at(th), file.string());
        std::cerr << "spectrum: " << file.string() << '\n';
    }
    for (const auto& [k, v] : s.report.results)
        print_result(k, v);
    s.finish();
}

void cmd_verify(const Options& o)
{
    Session s(o, "verify");
    const auto sim = run_simulation(s, o);
    const auto dq = s.cfg.derived();
    const auto chi = s.cfg.susceptibility();
    const auto& a = s.cfg.analysis;
    const auto grid = sim.total.grid();
    const double bw = grid[1] - grid[0];
    auto band = resonance_band(s.cfg.device.omega_m, a.compare_halfwidth * dq.gamma_eff, bw, a.exclude_bins);
    for (const auto& t : s.cfg.simulation.injected_tones) {
        const double h = (double(a.exclude_bins) + 3.5) * bw;
        band.exclude.emplace_back(t.freq - h, t.freq + h);
    }
    Table t{"verify", {"theta_rad", "rel_rms", "expected_rms", "max_abs_z", "mean_z", "bins"}, {}};
    bool ok = true;
    double worst_rms = 0, worst_z = 0;
    for (double th : s.cfg.simulation.theta_list) {
        const auto emp = sim.at(th);
        const auto c = oracle_compare(homodyne_spectrum(dq, chi, th, emp.grid), emp, band);
        t.add_row({th, c.rel_rms, c.expected_rms, c.max_abs_z, c.mean_z, double(c.bins)});
        worst_rms = std::max(worst_rms, c.rel_rms);
        worst_z = std::max(worst_z, c.max_abs_z);
        const bool pass = c.rel_rms < a.verify_rms && c.max_abs_z < a.verify_max_z;
        std::printf("theta %+7.2f deg  rel_rms %.4f (expected %.4f)  max|z| %.2f  %s\n", th * 180 / pi, c.rel_rms,
                    c.expected_rms, c.max_abs_z, pass ? "ok" : "FAILED");
        ok = ok && pass;
        write_spectrum(emp, (s.out / ("verify_theta_" + theta_tag(th) + ".csv")).string());
    }
    s.table(t);
    s.report.results.push_back({"worst_rel_rms", worst_rms});
    s.report.results.push_back({"worst_max_abs_z", worst_z});
    s.report.results.push_back({"passed", ok ? 1.0 : 0.0});
    s.finish();
    if (!ok)
        throw CheckFailed("oracle and analytic spectra disagree beyond rms " + std::to_string(a.verify_rms)
                          + " / max|z| " + std::to_string(a.verify_max_z));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum-correlation spectra, asymmetry and force-estimation toolkit"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "run configuration (INI or JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out-dir", o.out_dir, "output directory (overrides output.directory)");
    };
    auto grid_opts = [&](CLI::App* sub) {
        sub->add_option("--fmin", o.fmin, "lowest frequency, Hz");
        sub->add_option("--fmax", o.fmax, "highest frequency, Hz");
        sub->add_option("--bins", o.bins, "number of grid points");
    };

    auto* derive_cmd = app.add_subcommand("derive", "print derived quantities");
    common(derive_cmd);

    auto* spectrum_cmd = app.add_subcommand("spectrum", "analytic photocurrent or displacement spectrum");
    common(spectrum_cmd);
    grid_opts(spectrum_cmd);
    spectrum_cmd->add_option("--theta", o.theta, "LO phase, rad");
    spectrum_cmd->add_option("--model", o.model, "homodyne | extended | displacement");
    spectrum_cmd->add_option("-o,--output", o.output, "spectrum file");

    auto* asym_cmd = app.add_subcommand("asymmetry", "R_theta against LO phase");
    common(asym_cmd);
    asym_cmd->add_option("--theta-points,--theta-grid", o.theta_points, "uniform theta points over (-pi/2, pi/2]");
    asym_cmd->add_option("--method", o.method, "closed | band | corrected (default closed)");
    asym_cmd->add_option("--measured", o.measured, "directory of spectrum files with theta_rad metadata")
        ->check(CLI::ExistingDirectory);
    asym_cmd->add_flag("--no-correct", o.no_correct, "skip the susceptibility correction for measured spectra");
    asym_cmd->add_flag("--expect-unity-row", o.expect_unity, "fail unless the theta = pi/2 row has R = 1");

    auto* scaling_cmd = app.add_subcommand("scaling", "Delta R against power with a power-law fit");
    common(scaling_cmd);
    scaling_cmd->add_option("--powers", o.powers, "input powers, W")->delimiter(',');
    scaling_cmd->add_option("--method", o.method, "closed | band | corrected (default closed)");
    scaling_cmd->add_option("--theta-points", o.theta_points, "theta points per sweep");
    scaling_cmd->add_option("--expect-exponent", o.expect_exponent, "VALUE,TOLERANCE")->delimiter(',')->expected(2);

    auto* budget_cmd = app.add_subcommand("force-budget", "force-referred noise budget");
    common(budget_cmd);
    grid_opts(budget_cmd);
    budget_cmd->add_option("--theta", o.theta_spec, "LO phase in rad, or 'opt' for theta_opt per frequency");
    budget_cmd->add_option("--power", o.power, "input power, W");

    auto* sn_cmd = app.add_subcommand("force-sn", "two-tone signal-to-noise ratio against LO phase");
    common(sn_cmd);
    sn_cmd->add_option("--power", o.power, "input power, W");
    sn_cmd->add_option("--tones", o.tones, "two tone frequencies, Hz")->delimiter(',');
    sn_cmd->add_option("--theta-points", o.theta_points, "theta points");

    auto* sim_cmd = app.add_subcommand("simulate", "stochastic oracle run, writes Welch spectra");
    common(sim_cmd);
    sim_cmd->add_option("--seed", o.seed, "master seed");
    sim_cmd->add_option("--threads", o.threads, "worker threads (0: hardware)");

    auto* verify_cmd = app.add_subcommand("verify", "oracle against analytic spectra");
    common(verify_cmd);
    verify_cmd->add_option("--seed", o.seed, "master seed");
    verify_cmd->add_option("--threads", o.threads, "worker threads (0: hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*derive_cmd)
            cmd_derive(o);
        else if (*spectrum_cmd)
            cmd_spectrum(o);
        else if (*asym_cmd)
            cmd_asymmetry(o);
        else if (*scaling_cmd)
            cmd_scaling(o);
        else if (*budget_cmd)
            cmd_force_budget(o);
        else if (*sn_cmd)
            cmd_force_sn(o);
        else if (*sim_cmd)
            cmd_simulate(o);
        else if (*verify_cmd)
            cmd_verify(o);
    } catch (const CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return kCheckFailed;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kInvalid;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
