#include "optocorr/io.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace optocorr {

using constants::two_pi;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',' || ch == '\t' || ch == ' ' || ch == ';') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

bool parse_number(const std::string& s, double& v)
{
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

double psd_to_file(SpectrumNorm n, double internal)
{
    return n == SpectrumNorm::ShotNoiseUnits ? internal : 2.0 * internal;
}

double psd_from_file(SpectrumNorm n, double stored)
{
    return n == SpectrumNorm::ShotNoiseUnits ? stored : 0.5 * stored;
}

Spectrum read_spectrum(std::istream& in)
{
    Spectrum s;
    std::string line;
    int lineno = 0;
    int fcol = -1, pcol = -1;
    bool header = false;
    std::vector<double> fq, ps;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t[0] == '#') {
            const std::string kv = trim(t.substr(1));
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                continue; // free-form comment
            const std::string k = trim(kv.substr(0, eq)), v = trim(kv.substr(eq + 1));
            double x = 0;
            if (k == "norm") {
                s.norm = norm_from_string(v);
            } else if (k == "theta_rad" || k == "rbw_hz" || k == "averages") {
                if (!parse_number(v, x))
                    throw ParseError("metadata '" + k + "' is not a number", lineno);
                if (k == "theta_rad")
                    s.theta = x;
                else if (k == "rbw_hz")
                    s.rbw = two_pi * x;
                else
                    s.averages = x;
            } else if (k == "signed") {
                s.signed_values = (v == "1" || v == "true");
            }
            continue;
        }
        const auto fields = split_fields(t);
        if (!header) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "freq_hz")
                    fcol = int(i);
                else if (fields[i] == "psd")
                    pcol = int(i);
            }
            if (fcol < 0)
                throw ParseError("missing column 'freq_hz' in header", lineno);
            if (pcol < 0)
                throw ParseError("missing column 'psd' in header", lineno);
            header = true;
            continue;
        }
        const std::size_t need = std::size_t(std::max(fcol, pcol)) + 1;
        double f = 0, p = 0;
        if (fields.size() < need || !parse_number(fields[std::size_t(fcol)], f)
            || !parse_number(fields[std::size_t(pcol)], p))
            throw ParseError("malformed row " + std::to_string(fq.size() + 1), lineno);
        fq.push_back(f);
        ps.push_back(p);
    }
    if (!header)
        throw ParseError("no header line with columns 'freq_hz' and 'psd'");

    std::vector<std::size_t> idx(fq.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (!std::is_sorted(fq.begin(), fq.end())) {
        warn("spectrum rows not sorted by frequency; sorting on read");
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fq[a] < fq[b]; });
    }
    s.grid.reserve(fq.size());
    s.values.reserve(fq.size());
    for (std::size_t i : idx) {
        s.grid.push_back(two_pi * fq[i]);
        s.values.push_back(psd_from_file(s.norm, ps[i]));
    }
    s.validate();
    return s;
}

Spectrum read_spectrum(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ValidationError("spectrum", "cannot open '" + path + "'");
    return read_spectrum(f);
}

void write_spectrum(const Spectrum& s, std::ostream& out)
{
    s.validate();
    char buf[64];
    auto num = [&](double v) {
        const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
        return std::string(buf, r.ptr);
    };
    out << "# norm=" << to_string(s.norm) << '\n';
    out << "# psd_unit=" << (s.norm == SpectrumNorm::ShotNoiseUnits ? "shot_noise"
                             : s.norm == SpectrumNorm::ForcePSD  ? "N^2/Hz single-sided"
                                                                 : "m^2/Hz single-sided")
        << '\n';
    if (s.theta)
        out << "# theta_rad=" << num(*s.theta) << '\n';
    if (s.rbw)
        out << "# rbw_hz=" << num(*s.rbw / two_pi) << '\n';
    if (s.averages > 0)
        out << "# averages=" << num(s.averages) << '\n';
    if (s.signed_values)
        out << "# signed=1\n";
    out << "freq_hz,psd\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << num(s.grid[i] / two_pi) << ',' << num(psd_to_file(s.norm, s.values[i])) << '\n';
}

void write_spectrum(const Spectrum& s, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw ValidationError("spectrum", "cannot write '" + path + "'");
    write_spectrum(s, f);
    if (!f)
        throw Error("write failed for '" + path + "'");
}

} // namespace optocorr
