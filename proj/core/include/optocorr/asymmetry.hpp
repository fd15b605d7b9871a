#pragma once

#include "optocorr/params.hpp"
#include "optocorr/response.hpp"
#include "optocorr/spectra.hpp"

#include <functional>
#include <vector>

namespace optocorr {

/// Pair of bands of width `width` centred at Omega_m +/- delta.
struct BandSpec {
    double delta = 0;
    double width = 0;
    void validate() const; // width > 0, delta > width/2
};

/// Default analysis band: offset 2pi 21 kHz, width 2pi 20 kHz.
BandSpec default_band();

struct RatioResult {
    double value = 1;
    bool degenerate = false; // sin(theta) = 0, value is the limit 1
};

struct AsymmetryCurve {
    std::vector<double> thetas; // rad
    std::vector<double> ratios;
    BandSpec band;
    bool corrected = false;
};

/// Closed form of S(+delta)/S(-delta) in the Lorentzian tails.
RatioResult r_theta_closed(const DerivedQuantities& dq, double theta, double delta);

/// Trapezoid integral of a spectrum over [lo, hi] using only native grid points.
/// Throws BandError when the band leaves the grid or holds fewer than 8 points.
double band_power(const Spectrum& spec, double lo, double hi);

/// band_power divided by the span of the grid points it used.
double band_average(const Spectrum& spec, double lo, double hi);

/// Ratio of the +delta band power of spec_plus to the -delta band power of spec_minus.
/// Pass the same spectrum twice for the usual single-spectrum estimator.
double r_theta_band(const Spectrum& spec_plus, const Spectrum& spec_minus, const BandSpec& band,
                    double omega_m);

/// Band ratio for an analytic spectrum, integrated adaptively.
double r_theta_band_analytic(const std::function<double(double)>& spectrum, const BandSpec& band,
                             double omega_m, const QuadratureOptions& opt = {});

/// Ratio of |chi|^2 integrals, -delta band over +delta band.
double susceptibility_correction(const Susceptibility& s, const BandSpec& band,
                                 const QuadratureOptions& opt = {});

/// raw times susceptibility_correction.
double r_theta_corrected(double raw, const Susceptibility& s, const BandSpec& band,
                         const QuadratureOptions& opt = {});

struct DeltaR {
    double value = 0;
    double theta_max = 0;
    double theta_min = 0;
    bool boundary_extremum = false;
};

/// max R - min R over the sampled curve. Warns when an extremum sits on the grid edge.
DeltaR delta_r(const AsymmetryCurve& curve);

/// Four sqrt(eta n_QBA / n_th), the leading-order peak-to-peak asymmetry.
double delta_r_asymptotic(const DerivedQuantities& dq);

/// Uniform grid over (-pi/2, pi/2], n points (n >= 181 recommended).
std::vector<double> theta_grid(std::size_t n);

AsymmetryCurve closed_curve(const DerivedQuantities& dq, const BandSpec& band,
                            const std::vector<double>& thetas);

/// Adaptive band ratio of s_ii_extended for every theta, optionally corrected.
AsymmetryCurve model_curve(const DerivedQuantities& dq, const Susceptibility& s,
                           const BandSpec& band, const std::vector<double>& thetas,
                           bool corrected, const SpectrumOptions& opt = {});

/// Which correlation mechanisms feed the tail-asymptotic asymmetry.
struct CorrelationSources {
    bool quantum = true;   // vacuum amplitude fluctuations
    bool classical = true; // C_qq leakage term and detuning-transduced C_pp
};

/// Tail asymptotic of the extended spectrum, including classical noise terms.
/// With classical off and no excess noise it coincides with r_theta_closed.
RatioResult r_theta_asymptotic(const DerivedQuantities& dq, double theta, double delta,
                               const CorrelationSources& src = {});

struct ScalingFit {
    double exponent = 0;
    double exponent_stderr = 0;
    double amplitude = 0; // Delta R at 1 W
    double log_amplitude_stderr = 0;
    double r_squared = 0;
    std::size_t points = 0;
};

/// Least squares of log(Delta R) on log(P). Needs >= 3 positive points spanning a decade.
ScalingFit fit_power_scaling(const std::vector<double>& powers, const std::vector<double>& deltas);

} // namespace optocorr
