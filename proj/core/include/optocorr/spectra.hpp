#pragma once

#include "optocorr/params.hpp"
#include "optocorr/response.hpp"

#include <optional>
#include <vector>

namespace optocorr {

// Internal convention: symmetrized two-sided densities per unit dOmega/2pi,
// i.e. variance = integral S(Omega) dOmega / 2pi over (-inf, inf).
enum class SpectrumNorm { ShotNoiseUnits, ForcePSD, DisplacementPSD };

const char* to_string(SpectrumNorm n);
SpectrumNorm norm_from_string(const std::string& s);

struct Spectrum {
    std::vector<double> grid;   // rad/s, strictly increasing
    std::vector<double> values;
    SpectrumNorm norm = SpectrumNorm::ShotNoiseUnits;
    bool signed_values = false; // cross spectra may go negative
    std::optional<double> theta;
    std::optional<double> rbw;  // rad/s
    double averages = 0;        // effective periodogram averages, 0 for analytic

    std::size_t size() const { return grid.size(); }
    /// Throws ValidationError on length mismatch, non-monotone grid, non-finite
    /// or (for auto spectra) negative values.
    void validate() const;
};

struct SpectrumOptions {
    bool include_zero_point = true; // the +1/2 in n_th + n_QBA + 1/2
};

std::vector<double> linear_grid(double lo, double hi, std::size_t n);

/// Total force noise (hbar^2/x_zp^2) Gamma_m (n_th + n_QBA [+ 1/2]), N^2/Hz.
double s_ff_total(const DerivedQuantities& dq, const SpectrumOptions& opt = {});

/// |chi|^2 S_FF^tot, m^2/Hz.
double s_xx_total(const DerivedQuantities& dq, const Susceptibility& s, double omega,
                  const SpectrumOptions& opt = {});

/// Ponderomotive amplitude-phase correlation C Gamma_m Re(hbar chi / x_zp^2).
double s_pq_out(const DerivedQuantities& dq, const Susceptibility& s, double omega);

/// Detected quadrature spectra in shot-noise units (loss to the detector included).
struct QuadratureSpectra {
    double qq = 1;
    double pp = 1;
    double pq = 0; // symmetrized, real
};
QuadratureSpectra detected_quadratures(const DerivedQuantities& dq, const Susceptibility& s,
                                       double omega, const SpectrumOptions& opt = {});

/// Shot-noise normalized homodyne photocurrent spectrum at LO phase theta.
double s_ii_homodyne(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                     double omega, const SpectrumOptions& opt = {});

/// theta' = theta - 4 Delta / kappa
double rotated_quadrature(const DerivedQuantities& dq, double theta);

/// Homodyne spectrum with classical laser noise and small detuning, to first
/// order in Delta/kappa. Warns when |Delta|/kappa > 0.1.
double s_ii_extended(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                     double omega, const SpectrumOptions& opt = {});

/// Lorentzian-tail form at offset delta = Omega - Omega_m. Warns when |delta| < 10 Gamma_eff.
double s_ii_approx(const DerivedQuantities& dq, double theta, double delta);

// grid evaluations
Spectrum homodyne_spectrum(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                           const std::vector<double>& grid, const SpectrumOptions& opt = {});
Spectrum extended_spectrum(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                           const std::vector<double>& grid, const SpectrumOptions& opt = {});
Spectrum displacement_spectrum(const DerivedQuantities& dq, const Susceptibility& s,
                               const std::vector<double>& grid, const SpectrumOptions& opt = {});
Spectrum correlation_spectrum(const DerivedQuantities& dq, const Susceptibility& s,
                              const std::vector<double>& grid);

namespace detail {
// no-warning versions used inside sweeps
double s_ii_extended_quiet(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                           double omega, const SpectrumOptions& opt);
double s_ii_approx_quiet(const DerivedQuantities& dq, double theta, double delta);
} // namespace detail

} // namespace optocorr
