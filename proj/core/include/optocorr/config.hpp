#pragma once

#include "optocorr/asymmetry.hpp"
#include "optocorr/metrology.hpp"
#include "optocorr/params.hpp"
#include "optocorr/response.hpp"
#include "optocorr/stochastic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace optocorr {

// User-facing frequencies are in Hz; everything stored here is already
// converted to rad/s (or SI units).
struct AnalysisConfig {
    BandSpec band = default_band();
    std::size_t theta_points = 1801;
    std::vector<double> powers;          // W
    std::optional<double> freq_min;      // rad/s, spectrum command defaults
    std::optional<double> freq_max;
    std::size_t bins = 4001;
    // two-tone force analysis
    std::optional<double> tone_center;   // rad/s, default omega_m
    double tone_offset = 0;              // rad/s, default 2pi 20 kHz
    std::optional<double> tone_power;    // N^2 per tone; default from tone_snr
    double tone_snr = 100;               // SN - 1 of each tone at theta = pi/2
    SnBands sn_bands = default_sn_bands();
    // oracle verification
    double compare_halfwidth = 20;       // in units of gamma_eff
    std::size_t exclude_bins = 2;
    double verify_rms = 0.03;
    double verify_max_z = 4;
};

struct RunConfig {
    DeviceParams device;
    DriveParams drive;
    DampingModel damping = DampingModel::Viscous;
    std::optional<double> loss_angle;    // constant phi, default 1/Q
    AnalysisConfig analysis;
    SimConfig simulation;
    std::string output_dir = ".";
    std::string source;                  // path it was loaded from, if any

    Susceptibility susceptibility() const;
    DerivedQuantities derived() const { return derive(device, drive); }
    double tone_center() const { return analysis.tone_center.value_or(device.omega_m); }
    /// Runs every owning module's validation.
    void validate() const;
};

/// INI (sections, key = value) or JSON, picked by extension (.json) or content.
/// Unknown sections or keys are rejected. Errors: ParseError, ValidationError.
RunConfig load_config(const std::string& path);
RunConfig parse_config_ini(const std::string& text);
RunConfig parse_config_json(const std::string& text);

/// Serialized form that parse_config_json reads back to an equal RunConfig.
std::string config_to_json(const RunConfig& cfg, int indent = 2);

} // namespace optocorr
