#pragma once

#include "optocorr/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace optocorr {

const char* version();

/// Column names carry their units, e.g. "freq_hz" or "s_imp_N2_per_Hz".
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> r);
};

struct ResultReport {
    std::string command;
    RunConfig config;
    std::vector<std::pair<std::string, double>> derived;
    std::vector<std::pair<std::string, double>> results; // scalar outcomes
    std::vector<Table> tables;
    std::vector<std::string> warnings;
    std::optional<std::uint64_t> seed;
    std::string timestamp; // ISO 8601 UTC, filled by write_report when empty
};

/// The derived quantities of a config as (key-with-unit, value) pairs.
std::vector<std::pair<std::string, double>> derived_entries(const DerivedQuantities& dq);

/// One JSON document; its "config" member loads back through parse_config_json.
void write_report(const ResultReport& report, const std::string& path);
void write_report(const ResultReport& report, std::ostream& out);

/// CSV with a header row.
void write_table(const Table& t, const std::string& path);
void write_table(const Table& t, std::ostream& out);

} // namespace optocorr
