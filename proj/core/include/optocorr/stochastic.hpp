#pragma once

#include "optocorr/metrology.hpp"
#include "optocorr/params.hpp"
#include "optocorr/welch.hpp"

#include <cstdint>
#include <vector>

namespace optocorr {

struct SimConfig {
    double dt = 0;                  // s
    double duration = 0;            // s, per trajectory
    std::uint64_t seed = 1;
    std::size_t n_segments = 8;     // Welch segments per trajectory
    Window window = Window::Hann;
    std::vector<double> theta_list; // rad
    std::vector<ForceTone> injected_tones;
    std::size_t n_trajectories = 1; // independent records, each with its own stream

    std::size_t samples() const;
    /// dt*omega_m < 0.05, >= 2^16 samples, >= 8 segments.
    void validate(const DeviceParams& device) const;
};

struct QuadratureTraces {
    std::vector<double> t;      // s, start of each sampling interval
    std::vector<double> z;      // x / x_zp at the end of each interval
    std::vector<double> i_q;    // amplitude-quadrature photocurrent, interval averages
    std::vector<double> i_p;    // phase-quadrature photocurrent
    std::vector<double> thetas;
    std::vector<std::vector<double>> i_theta; // cos(theta) i_q + sin(theta) i_p
};

/// One trajectory (index 0 of cfg.seed). Photocurrents are shot-noise normalized:
/// with C = 0 their spectral density is 1.
QuadratureTraces simulate(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg);

struct SimulatedSpectra {
    WelchAccumulator total;                     // all trajectories merged in index order
    std::vector<WelchAccumulator> trajectories; // kept when requested
    std::vector<Spectrum> theta_spectra;        // one per cfg.theta_list entry

    Spectrum at(double theta) const { return total.combined(theta); }
};

/// Streams every trajectory through a two-channel Welch accumulator without
/// storing the traces. Trajectories run on up to `threads` workers (0: hardware).
SimulatedSpectra simulate_spectra(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg,
                                  bool keep_trajectories = false, unsigned threads = 0);

/// 64-bit stream seed for trajectory `index`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

} // namespace optocorr
