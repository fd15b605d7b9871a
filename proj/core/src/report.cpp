#include "optocorr/report.hpp"

#include "optocorr/error.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>

namespace optocorr {

const char* version()
{
    return "0.3.0";
}

void Table::add_row(std::vector<double> r)
{
    if (r.size() != columns.size())
        throw Error("table '" + name + "': row has " + std::to_string(r.size()) + " values for "
                    + std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(r));
}

std::vector<std::pair<std::string, double>> derived_entries(const DerivedQuantities& dq)
{
    return {
        {"x_zp_m", dq.x_zp},
        {"n_c", dq.n_c},
        {"g_rad_per_s", dq.g},
        {"c0", dq.c0},
        {"cooperativity", dq.coop},
        {"n_th", dq.n_th},
        {"n_qba", dq.n_qba},
        {"n_cba_q", dq.n_cba_q},
        {"n_cba_p", dq.n_cba_p},
        {"eta_total", dq.eta_total},
        {"gamma_eff_rad_per_s", dq.gamma_eff},
    };
}

namespace {

std::string now_utc()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace

void write_report(const ResultReport& r, std::ostream& out)
{
    using nlohmann::json;
    json j;
    j["command"] = r.command;
    j["config"] = json::parse(config_to_json(r.config));
    json d = json::object();
    for (const auto& [k, v] : r.derived)
        d[k] = finite_or_null(v);
    j["derived"] = d;
    json res = json::object();
    for (const auto& [k, v] : r.results)
        res[k] = finite_or_null(v);
    j["results"] = res;
    json tabs = json::array();
    for (const auto& t : r.tables) {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json jr = json::array();
            for (double v : row)
                jr.push_back(finite_or_null(v));
            rows.push_back(jr);
        }
        tabs.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    j["tables"] = tabs;
    j["warnings"] = r.warnings;
    json prov = {{"tool", "optocorr"}, {"version", version()},
                 {"timestamp", r.timestamp.empty() ? now_utc() : r.timestamp}};
    if (r.seed)
        prov["seed"] = *r.seed;
    if (!r.config.source.empty())
        prov["config_path"] = r.config.source;
    j["provenance"] = prov;
    out << j.dump(2) << '\n';
}

void write_report(const ResultReport& r, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw Error("cannot write report '" + path + "'");
    write_report(r, f);
}

void write_table(const Table& t, std::ostream& out)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << '\n';
    char buf[64];
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), row[i], std::chars_format::general, 12);
            out << (i ? "," : "") << std::string(buf, res.ptr);
        }
        out << '\n';
    }
}

void write_table(const Table& t, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw Error("cannot write table '" + path + "'");
    write_table(t, f);
}

} // namespace optocorr
