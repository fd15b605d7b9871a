#pragma once

#include "optocorr/params.hpp"
#include "optocorr/response.hpp"
#include "optocorr/spectra.hpp"

#include <vector>

namespace optocorr {

/// Coherent force component. `power` is the mean-square force <dF^2> in N^2.
struct ForceTone {
    double freq = 0;  // rad/s
    double power = 0; // N^2
    void validate() const;
};

enum class ToneShape { DeltaOnGrid, Lorentzian };

/// One frequency of the force-referred homodyne spectrum (units N^2/Hz).
struct ForceBudgetRow {
    double omega = 0;
    double s_ext = 0;
    double s_th = 0;
    double s_qba = 0;
    double s_imp = 0;
    double s_corr = 0; // can be negative
    double total = 0;
    double theta = 0;
};

struct ForceBudget {
    std::vector<double> grid;
    std::vector<double> s_ext, s_th, s_qba, s_imp, s_corr, total;
    std::vector<double> theta; // LO phase used at each frequency
};

/// Components of the force estimator spectrum at (theta, omega).
/// Throws DegenerateAngleError when sin(theta) = 0 and NoMeasurementError for eta*C = 0.
ForceBudgetRow force_estimator_spectrum(const DerivedQuantities& dq, const Susceptibility& s,
                                        double theta, double omega, double s_ext = 0,
                                        const SpectrumOptions& opt = {});

/// cot(theta_opt) = -(hbar/x_zp^2) 2 eta C Gamma_m Re chi, principal value in (0, pi).
/// This cotangent exactly minimizes the estimator including imprecision.
double theta_opt(const DerivedQuantities& dq, const Susceptibility& s, double omega);

/// Minimizes the estimator numerically (Brent) over (0, pi).
double theta_opt_numeric(const DerivedQuantities& dq, const Susceptibility& s, double omega);

/// 1 - eta (Re chi/|chi|)^2, the back-action multiplier at theta_opt.
double backaction_multiplier(const DerivedQuantities& dq, const Susceptibility& s, double omega);

/// Optimal estimator in closed form: S_th + S_imp(pi/2) + S_QBA [1 - eta (Re chi/|chi|)^2].
double optimal_estimator(const DerivedQuantities& dq, const Susceptibility& s, double omega,
                         const SpectrumOptions& opt = {});

/// eps(pi/2)/eps(theta); eps = estimator minus thermal and external parts.
double xi_thermal(const DerivedQuantities& dq, const Susceptibility& s, double omega, double theta);
double xi_thermal_opt(const DerivedQuantities& dq, const Susceptibility& s, double omega);

/// Total estimator ratio (phase quadrature over theta_opt), thermal noise included.
double xi_external(const DerivedQuantities& dq, const Susceptibility& s, double omega,
                   const SpectrumOptions& opt = {});
/// 1 + eta (n_QBA/n_th) (Re chi/|chi|)^2, valid when back-action dominates imprecision.
double xi_external_approx(const DerivedQuantities& dq, const Susceptibility& s, double omega);

/// Relative SNR of tones at Omega_F +/- delta: |chi+/chi-|^2 (P+/P-) / R, with
/// R = S_II(Omega_plus)/S_II(Omega_minus) of the tone-free spectrum.
double sn_ratio_closed(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                       const ForceTone& plus, const ForceTone& minus,
                       const SpectrumOptions& opt = {});

/// Band layout for the signal-to-noise estimator. Noise bands sit at +/- noise_offset
/// from the tone.
struct SnBands {
    double tone_width = 0;
    double noise_width = 0;
    double noise_offset = 0;
    void validate() const; // no overlap between tone and noise bands
};

/// 3 kHz tone band, 5 kHz noise bands, noise offset 5.5 kHz (all angular).
SnBands default_sn_bands();

/// Mean density in the tone band over the mean density of the two flanking noise bands.
double sn_band(const Spectrum& spec, double tone_center, const SnBands& bands);

/// Mean square of one delta tone at `freq` that gives sn_band - 1 = snr at theta = pi/2,
/// on `grid` with the tone-free homodyne background.
double tone_power_for_snr(const DerivedQuantities& dq, const Susceptibility& s,
                          const std::vector<double>& grid, double freq, const SnBands& bands,
                          double snr, const SpectrumOptions& opt = {});

/// Add tone response to a shot-noise-normalized homodyne spectrum.
void add_tones_homodyne(Spectrum& spec, const DerivedQuantities& dq, const Susceptibility& s,
                        double theta, const std::vector<ForceTone>& tones,
                        ToneShape shape = ToneShape::DeltaOnGrid);

/// Force-referred tone spectrum (N^2/Hz) on a grid.
std::vector<double> tone_force_psd(const std::vector<double>& grid, const std::vector<ForceTone>& tones,
                                   ToneShape shape, double linewidth);

/// Budget at fixed theta.
ForceBudget force_budget(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                         const std::vector<double>& grid, const std::vector<ForceTone>& tones = {},
                         ToneShape shape = ToneShape::DeltaOnGrid, const SpectrumOptions& opt = {});
/// Budget with theta_opt chosen at every frequency.
ForceBudget force_budget_opt(const DerivedQuantities& dq, const Susceptibility& s,
                             const std::vector<double>& grid, const std::vector<ForceTone>& tones = {},
                             ToneShape shape = ToneShape::DeltaOnGrid, const SpectrumOptions& opt = {});

} // namespace optocorr
