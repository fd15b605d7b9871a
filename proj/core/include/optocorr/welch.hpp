#pragma once

#include "optocorr/spectra.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace optocorr {

enum class Window { Hann, Rect };

const char* to_string(Window w);
Window window_from_string(const std::string& s);

/// Periodic window of length n (Hann: 0.5 - 0.5 cos(2 pi k/n)).
std::vector<double> window_coefficients(Window w, std::size_t n);

/// Effective number of independent averages for k segments of length n at 50% overlap.
/// Uses the window overlap correlation rho_j = sum w_i w_{i+j n/2} / sum w^2.
double welch_effective_averages(Window w, std::size_t n, std::size_t k);

/// Segment length for k half-overlapping segments in n samples (floor(2n/(k+1)), even).
std::size_t welch_segment_length(std::size_t n_samples, std::size_t n_segments);

// Two-channel averaged periodogram: accumulates |Q|^2, |P|^2 and Re(Q P*).
// Densities are two-sided per dOmega/2pi, so a white series with variance
// 1/dt has density 1.
class WelchAccumulator {
public:
    WelchAccumulator(std::size_t segment_length, double dt, Window w);
    ~WelchAccumulator();
    WelchAccumulator(WelchAccumulator&&) noexcept;
    WelchAccumulator& operator=(WelchAccumulator&&) noexcept;
    WelchAccumulator(const WelchAccumulator&);
    WelchAccumulator& operator=(const WelchAccumulator&);

    /// One segment per channel, each of segment_length samples. p may be null.
    /// Segments added between begin_run() calls are taken as half-overlapping
    /// pieces of one contiguous record.
    void add_segment(const double* q, const double* p);
    void begin_run();
    void merge(const WelchAccumulator& other);

    std::size_t segment_length() const { return n_; }
    std::size_t segments() const { return count_; }
    double dt() const { return dt_; }
    Window window() const { return window_; }
    /// Sum over runs of welch_effective_averages.
    double effective_averages() const;
    std::size_t runs() const { return run_lengths_.size(); }

    std::vector<double> grid() const; // rad/s, bins 0..n/2
    Spectrum qq() const;
    Spectrum pp() const;
    Spectrum qp() const;              // signed
    /// cos^2 QQ + sin^2 PP + sin(2 theta) Re QP
    Spectrum combined(double theta) const;

private:
    struct Plan;
    Spectrum make(const std::vector<double>& acc, bool is_signed) const;

    std::size_t n_;
    double dt_;
    Window window_;
    std::vector<double> win_;
    double scale_;
    std::vector<double> sqq_, spp_, sqp_;
    std::size_t count_ = 0;
    std::vector<std::size_t> run_lengths_;
    std::unique_ptr<Plan> plan_;
};

/// Welch PSD of a single real series with n_segments half-overlapping segments.
/// Throws InsufficientDataError when the segments do not fit.
Spectrum welch_psd(std::span<const double> trace, double dt, std::size_t n_segments, Window w);

/// Restricts a comparison to [lo, hi] minus any excluded intervals (rad/s).
struct CompareBand {
    double lo = 0;
    double hi = 0;
    std::vector<std::pair<double, double>> exclude;
};

/// [omega_m - halfwidth, omega_m + halfwidth] without the bins within
/// `exclude_bins` of the resonance bin.
CompareBand resonance_band(double omega_m, double halfwidth, double bin_width, std::size_t exclude_bins);

struct OracleComparison {
    double rel_rms = 0;      // sqrt(mean((emp/ana - 1)^2))
    double expected_rms = 0; // 1/sqrt(averages), the chi-squared spread
    double max_abs_z = 0;
    double mean_z = 0;
    std::size_t bins = 0;
    std::vector<double> grid;
    std::vector<double> z;
};

/// Per-bin z = (emp - ana) sqrt(nu) / ana with nu the empirical averages.
/// Throws GridMismatchError unless both spectra share the grid.
OracleComparison oracle_compare(const Spectrum& analytic, const Spectrum& empirical, const CompareBand& band);

} // namespace optocorr
