#include "optocorr/config.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace optocorr {

using constants::two_pi;

namespace {

// section -> key -> raw text
using Raw = std::map<std::string, std::map<std::string, std::string>>;

const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> s = {
        {"device",
         {"mech_frequency_hz", "mech_linewidth_hz", "mass_kg", "cavity_linewidth_hz", "coupling_ratio", "g0_hz",
          "wavelength_m", "temperature_k", "damping", "loss_angle"}},
        {"drive",
         {"power_w", "detuning_hz", "detection_efficiency", "c_qq", "c_pp", "feedback_linewidth_hz",
          "intracavity_photons"}},
        {"analysis",
         {"band_offset_hz", "band_width_hz", "theta_points", "powers_w", "freq_min_hz", "freq_max_hz", "bins",
          "tone_center_hz", "tone_offset_hz", "tone_power_n2", "tone_snr", "sn_tone_width_hz", "sn_noise_width_hz",
          "sn_noise_offset_hz", "compare_halfwidth_linewidths", "exclude_bins", "verify_rms", "verify_max_z"}},
        {"simulation",
         {"dt_s", "duration_s", "seed", "segments", "window", "thetas_deg", "trajectories", "tone_freqs_hz",
          "tone_powers_n2"}},
        {"output", {"directory"}},
    };
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ValidationError(key, "expected a number, got '" + text + "'");
    return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ValidationError(key, "expected a non-negative integer, got '" + text + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(to_double(key, item));
    return out;
}

class Reader {
public:
    explicit Reader(const Raw& raw) : raw_(raw)
    {
        for (const auto& [sec, keys] : raw) {
            auto it = schema().find(sec);
            if (it == schema().end())
                throw ValidationError(sec, "unknown section");
            for (const auto& [k, v] : keys)
                if (!it->second.count(k))
                    throw ValidationError(sec + "." + k, "unknown key");
        }
    }

    const std::string* get(const std::string& sec, const std::string& key) const
    {
        auto s = raw_.find(sec);
        if (s == raw_.end())
            return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }
    bool has_section(const std::string& sec) const { return raw_.count(sec) > 0; }

    double req(const std::string& sec, const std::string& key) const
    {
        const auto* v = get(sec, key);
        if (!v)
            throw ValidationError(sec + "." + key, "required key missing");
        return to_double(sec + "." + key, *v);
    }
    std::optional<double> opt(const std::string& sec, const std::string& key) const
    {
        const auto* v = get(sec, key);
        if (!v)
            return std::nullopt;
        return to_double(sec + "." + key, *v);
    }
    double num(const std::string& sec, const std::string& key, double dflt) const
    {
        return opt(sec, key).value_or(dflt);
    }
    std::optional<std::uint64_t> uint(const std::string& sec, const std::string& key) const
    {
        const auto* v = get(sec, key);
        if (!v)
            return std::nullopt;
        return to_uint(sec + "." + key, *v);
    }
    std::optional<std::vector<double>> list(const std::string& sec, const std::string& key) const
    {
        const auto* v = get(sec, key);
        if (!v)
            return std::nullopt;
        return to_list(sec + "." + key, *v);
    }
    std::optional<std::string> str(const std::string& sec, const std::string& key) const
    {
        const auto* v = get(sec, key);
        if (!v)
            return std::nullopt;
        return trim(*v);
    }

private:
    const Raw& raw_;
};

RunConfig build(const Raw& raw)
{
    Reader r(raw);
    if (!r.has_section("device"))
        throw ValidationError("device", "section is required");

    RunConfig c;
    auto& d = c.device;
    d.omega_m = two_pi * r.req("device", "mech_frequency_hz");
    d.gamma_m = two_pi * r.req("device", "mech_linewidth_hz");
    d.mass_eff = r.req("device", "mass_kg");
    d.kappa = two_pi * r.req("device", "cavity_linewidth_hz");
    d.eta_c = r.req("device", "coupling_ratio");
    d.g0 = two_pi * r.req("device", "g0_hz");
    d.wavelength = r.req("device", "wavelength_m");
    d.temperature = r.req("device", "temperature_k");
    if (auto m = r.str("device", "damping")) {
        if (*m == "viscous")
            c.damping = DampingModel::Viscous;
        else if (*m == "structural")
            c.damping = DampingModel::Structural;
        else
            throw ValidationError("device.damping", "expected viscous or structural, got '" + *m + "'");
    }
    c.loss_angle = r.opt("device", "loss_angle");

    auto& v = c.drive;
    v.power_in = r.num("drive", "power_w", 0.0);
    v.detuning = two_pi * r.num("drive", "detuning_hz", 0.0);
    v.eta_path = r.num("drive", "detection_efficiency", 1.0);
    v.c_qq = r.num("drive", "c_qq", 0.0);
    v.c_pp = r.num("drive", "c_pp", 0.0);
    if (auto g = r.opt("drive", "feedback_linewidth_hz"))
        v.gamma_eff = two_pi * *g;
    v.n_c_override = r.opt("drive", "intracavity_photons");

    auto& a = c.analysis;
    a.band.delta = two_pi * r.num("analysis", "band_offset_hz", a.band.delta / two_pi);
    a.band.width = two_pi * r.num("analysis", "band_width_hz", a.band.width / two_pi);
    if (auto n = r.uint("analysis", "theta_points"))
        a.theta_points = *n;
    if (auto p = r.list("analysis", "powers_w"))
        a.powers = *p;
    if (auto f = r.opt("analysis", "freq_min_hz"))
        a.freq_min = two_pi * *f;
    if (auto f = r.opt("analysis", "freq_max_hz"))
        a.freq_max = two_pi * *f;
    if (auto n = r.uint("analysis", "bins"))
        a.bins = *n;
    if (auto f = r.opt("analysis", "tone_center_hz"))
        a.tone_center = two_pi * *f;
    a.tone_offset = two_pi * r.num("analysis", "tone_offset_hz", 20e3);
    a.tone_power = r.opt("analysis", "tone_power_n2");
    a.tone_snr = r.num("analysis", "tone_snr", a.tone_snr);
    a.sn_bands.tone_width = two_pi * r.num("analysis", "sn_tone_width_hz", a.sn_bands.tone_width / two_pi);
    a.sn_bands.noise_width = two_pi * r.num("analysis", "sn_noise_width_hz", a.sn_bands.noise_width / two_pi);
    a.sn_bands.noise_offset = two_pi * r.num("analysis", "sn_noise_offset_hz",
                                             (a.sn_bands.tone_width + a.sn_bands.noise_width / 2) / two_pi);
    a.compare_halfwidth = r.num("analysis", "compare_halfwidth_linewidths", a.compare_halfwidth);
    if (auto n = r.uint("analysis", "exclude_bins"))
        a.exclude_bins = *n;
    a.verify_rms = r.num("analysis", "verify_rms", a.verify_rms);
    a.verify_max_z = r.num("analysis", "verify_max_z", a.verify_max_z);

    auto& s = c.simulation;
    s.dt = r.num("simulation", "dt_s", 0.0);
    s.duration = r.num("simulation", "duration_s", 0.0);
    if (auto n = r.uint("simulation", "seed"))
        s.seed = *n;
    if (auto n = r.uint("simulation", "segments"))
        s.n_segments = *n;
    if (auto w = r.str("simulation", "window"))
        s.window = window_from_string(*w);
    if (auto t = r.list("simulation", "thetas_deg"))
        for (double deg : *t)
            s.theta_list.push_back(deg * constants::pi / 180.0);
    if (auto n = r.uint("simulation", "trajectories"))
        s.n_trajectories = *n;
    const auto freqs = r.list("simulation", "tone_freqs_hz").value_or(std::vector<double>{});
    const auto pows = r.list("simulation", "tone_powers_n2").value_or(std::vector<double>{});
    if (freqs.size() != pows.size())
        throw ValidationError("simulation.tone_powers_n2", "needs one power per tone frequency");
    for (std::size_t i = 0; i < freqs.size(); ++i)
        s.injected_tones.push_back({two_pi * freqs[i], pows[i]});

    if (auto o = r.str("output", "directory"))
        c.output_dir = *o;

    c.validate();
    return c;
}

} // namespace

Susceptibility RunConfig::susceptibility() const
{
    LossAngle phi;
    if (loss_angle)
        phi = constant_loss(*loss_angle);
    return Susceptibility::for_device(device, drive, damping, phi);
}

void RunConfig::validate() const
{
    device.validate();
    drive.validate(device);
    if (loss_angle && (!std::isfinite(*loss_angle) || *loss_angle < 0))
        throw ValidationError("device.loss_angle", "must be >= 0");
    try {
        analysis.band.validate();
    } catch (const ValidationError& e) {
        throw ValidationError("analysis." + e.key(), e.what());
    }
    if (analysis.theta_points < 2)
        throw ValidationError("analysis.theta_points", "need at least 2");
    for (double p : analysis.powers)
        if (!(p > 0))
            throw ValidationError("analysis.powers_w", "powers must be > 0");
    if (analysis.bins < 2)
        throw ValidationError("analysis.bins", "need at least 2");
    if (analysis.freq_min && analysis.freq_max && !(*analysis.freq_max > *analysis.freq_min))
        throw ValidationError("analysis.freq_max_hz", "must exceed freq_min_hz");
    if (!(analysis.tone_offset > 0))
        throw ValidationError("analysis.tone_offset_hz", "must be > 0");
    if (analysis.tone_power && !(*analysis.tone_power > 0))
        throw ValidationError("analysis.tone_power_n2", "must be > 0");
    if (!(analysis.tone_snr > 0))
        throw ValidationError("analysis.tone_snr", "must be > 0");
    analysis.sn_bands.validate();
    if (!(analysis.verify_rms > 0) || !(analysis.verify_max_z > 0) || !(analysis.compare_halfwidth > 0))
        throw ValidationError("analysis.verify_rms", "verification thresholds must be > 0");
    if (simulation.dt > 0 || simulation.duration > 0)
        simulation.validate(device);
}

RunConfig parse_config_ini(const std::string& text)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    // ptree only knows ';' comments; blank '#' lines so line numbers survive
    std::string cleaned;
    std::istringstream lines(text);
    for (std::string l; std::getline(lines, l);) {
        const auto p = l.find_first_not_of(" \t");
        if (p != std::string::npos && l[p] == '#')
            l.clear();
        cleaned += l;
        cleaned += '\n';
    }
    std::istringstream in(cleaned);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(e.message(), int(e.line()));
    }
    Raw raw;
    for (const auto& [sec, node] : tree) {
        if (node.empty() && !node.data().empty())
            throw ValidationError(sec, "key outside of any section");
        auto& m = raw[sec];
        for (const auto& [k, v] : node)
            m[k] = v.get_value<std::string>();
    }
    return build(raw);
}

RunConfig parse_config_json(const std::string& text)
{
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset only; recover the line and column from it
        const std::size_t off = std::min<std::size_t>(e.byte, text.size());
        int line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < off; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(e.what(), line, col);
    }
    if (!j.is_object())
        throw ParseError("top level must be an object", 1, 1);
    Raw raw;
    for (const auto& [sec, node] : j.items()) {
        if (sec == "provenance")
            continue;
        if (!node.is_object())
            throw ValidationError(sec, "section must be an object");
        auto& m = raw[sec];
        for (const auto& [k, v] : node.items()) {
            if (v.is_string()) {
                m[k] = v.get<std::string>();
            } else if (v.is_number()) {
                m[k] = v.dump();
            } else if (v.is_array()) {
                std::string joined;
                for (const auto& e : v) {
                    if (!e.is_number())
                        throw ValidationError(sec + "." + k, "list entries must be numbers");
                    if (!joined.empty())
                        joined += ",";
                    joined += e.dump();
                }
                m[k] = joined;
            } else {
                throw ValidationError(sec + "." + k, "unsupported value type");
            }
        }
    }
    return build(raw);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ValidationError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    const bool is_json = (path.size() > 5 && path.substr(path.size() - 5) == ".json")
                         || trim(text).rfind('{', 0) == 0;
    RunConfig c = is_json ? parse_config_json(text) : parse_config_ini(text);
    c.source = path;
    return c;
}

std::string config_to_json(const RunConfig& c, int indent)
{
    using nlohmann::json;
    json j;
    const auto& d = c.device;
    j["device"] = {
        {"mech_frequency_hz", d.omega_m / two_pi},
        {"mech_linewidth_hz", d.gamma_m / two_pi},
        {"mass_kg", d.mass_eff},
        {"cavity_linewidth_hz", d.kappa / two_pi},
        {"coupling_ratio", d.eta_c},
        {"g0_hz", d.g0 / two_pi},
        {"wavelength_m", d.wavelength},
        {"temperature_k", d.temperature},
        {"damping", c.damping == DampingModel::Viscous ? "viscous" : "structural"},
    };
    if (c.loss_angle)
        j["device"]["loss_angle"] = *c.loss_angle;

    const auto& v = c.drive;
    j["drive"] = {
        {"power_w", v.power_in},
        {"detuning_hz", v.detuning / two_pi},
        {"detection_efficiency", v.eta_path},
        {"c_qq", v.c_qq},
        {"c_pp", v.c_pp},
    };
    if (v.gamma_eff)
        j["drive"]["feedback_linewidth_hz"] = *v.gamma_eff / two_pi;
    if (v.n_c_override)
        j["drive"]["intracavity_photons"] = *v.n_c_override;

    const auto& a = c.analysis;
    json an = {
        {"band_offset_hz", a.band.delta / two_pi},
        {"band_width_hz", a.band.width / two_pi},
        {"theta_points", a.theta_points},
        {"bins", a.bins},
        {"tone_offset_hz", a.tone_offset / two_pi},
        {"tone_snr", a.tone_snr},
        {"sn_tone_width_hz", a.sn_bands.tone_width / two_pi},
        {"sn_noise_width_hz", a.sn_bands.noise_width / two_pi},
        {"sn_noise_offset_hz", a.sn_bands.noise_offset / two_pi},
        {"compare_halfwidth_linewidths", a.compare_halfwidth},
        {"exclude_bins", a.exclude_bins},
        {"verify_rms", a.verify_rms},
        {"verify_max_z", a.verify_max_z},
    };
    if (!a.powers.empty())
        an["powers_w"] = a.powers;
    if (a.freq_min)
        an["freq_min_hz"] = *a.freq_min / two_pi;
    if (a.freq_max)
        an["freq_max_hz"] = *a.freq_max / two_pi;
    if (a.tone_center)
        an["tone_center_hz"] = *a.tone_center / two_pi;
    if (a.tone_power)
        an["tone_power_n2"] = *a.tone_power;
    j["analysis"] = an;

    const auto& s = c.simulation;
    {
        std::vector<double> deg, freqs, pows;
        for (double t : s.theta_list)
            deg.push_back(t * 180.0 / constants::pi);
        for (const auto& t : s.injected_tones) {
            freqs.push_back(t.freq / two_pi);
            pows.push_back(t.power);
        }
        json sj = {
            {"dt_s", s.dt},
            {"duration_s", s.duration},
            {"seed", s.seed},
            {"segments", s.n_segments},
            {"window", to_string(s.window)},
            {"trajectories", s.n_trajectories},
        };
        if (!deg.empty())
            sj["thetas_deg"] = deg;
        if (!freqs.empty()) {
            sj["tone_freqs_hz"] = freqs;
            sj["tone_powers_n2"] = pows;
        }
        j["simulation"] = sj;
    }
    j["output"] = {{"directory", c.output_dir}};
    return j.dump(indent);
}

} // namespace optocorr
