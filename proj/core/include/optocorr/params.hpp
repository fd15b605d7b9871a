#pragma once

#include <optional>

namespace optocorr {

// All frequencies and rates are angular (rad/s). SI units everywhere else.
struct DeviceParams {
    double omega_m = 0;     // mechanical resonance
    double gamma_m = 0;     // intrinsic mechanical damping
    double mass_eff = 0;    // kg
    double kappa = 0;       // total cavity decay
    double eta_c = 0;       // kappa_ex / kappa
    double g0 = 0;          // vacuum coupling
    double wavelength = 0;  // m
    double temperature = 0; // K

    double quality_factor() const { return omega_m / gamma_m; }
    double laser_frequency() const; // omega_L = 2 pi c / lambda

    /// Throws ValidationError naming the first bad field.
    void validate() const;
};

struct DriveParams {
    double power_in = 0; // W, at the cavity input
    double detuning = 0; // laser minus cavity, rad/s
    double eta_path = 1; // detection efficiency downstream of the cavity
    double c_qq = 0;     // white classical amplitude noise (units of vacuum)
    double c_pp = 0;     // white classical phase noise
    /// Damping under feedback; unset means no feedback (gamma_m).
    std::optional<double> gamma_eff;
    /// Replaces the input-power formula for the intracavity photon number.
    std::optional<double> n_c_override;

    double effective_damping(const DeviceParams& d) const { return gamma_eff.value_or(d.gamma_m); }
    void validate(const DeviceParams& d) const;
};

// Everything downstream needs, evaluated once. The context block copies the
// few raw parameters the spectral formulas use so that a DerivedQuantities
// can be passed around on its own.
struct DerivedQuantities {
    double x_zp = 0;      // m
    double n_c = 0;
    double g = 0;         // g0 sqrt(n_c)
    double c0 = 0;
    double coop = 0;      // C
    double n_th = 0;
    double n_qba = 0;
    double n_cba_q = 0;
    double n_cba_p = 0;
    double eta_total = 0; // eta_c * eta_path

    // context
    double omega_m = 0;
    double gamma_m = 0;
    double gamma_eff = 0;
    double mass_eff = 0;
    double kappa = 0;
    double detuning = 0;
    double eta_c = 0;
    double c_qq = 0;
    double c_pp = 0;

    /// n_th + n_QBA, the occupation entering the asymptotic forms.
    double n_total() const { return n_th + n_qba; }
    /// (4 Omega_m Delta / kappa^2), the detuning transduction of phase noise.
    double phase_noise_transduction() const;
};

DerivedQuantities derive(const DeviceParams& device, const DriveParams& drive);

/// Intracavity photon number from input power (no override applied).
double intracavity_photons(const DeviceParams& device, const DriveParams& drive);

/// 1/(16 eta C). Throws NoMeasurementError for C = 0 or eta = 0.
double imprecision_occupation(const DerivedQuantities& dq);

} // namespace optocorr
