#include "optocorr/params.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <cmath>

namespace optocorr {

namespace {

void require_positive(const char* key, double v)
{
    if (!std::isfinite(v) || v <= 0)
        throw ValidationError(key, "must be finite and > 0 (got " + std::to_string(v) + ")");
}

void require_unit_interval(const char* key, double v)
{
    if (!std::isfinite(v) || v < 0 || v > 1)
        throw ValidationError(key, "must lie in [0,1] (got " + std::to_string(v) + ")");
}

void require_nonnegative(const char* key, double v)
{
    if (!std::isfinite(v) || v < 0)
        throw ValidationError(key, "must be finite and >= 0 (got " + std::to_string(v) + ")");
}

} // namespace

double DeviceParams::laser_frequency() const
{
    return constants::two_pi * constants::c / wavelength;
}

void DeviceParams::validate() const
{
    require_positive("omega_m", omega_m);
    require_positive("gamma_m", gamma_m);
    require_positive("mass_eff", mass_eff);
    require_positive("kappa", kappa);
    require_unit_interval("eta_c", eta_c);
    require_positive("g0", g0);
    require_positive("wavelength", wavelength);
    require_positive("temperature", temperature);
    if (omega_m / gamma_m <= 1)
        throw ValidationError("gamma_m", "oscillator must be underdamped (Q = omega_m/gamma_m > 1)");
}

void DriveParams::validate(const DeviceParams& d) const
{
    require_nonnegative("power_in", power_in);
    if (!std::isfinite(detuning))
        throw ValidationError("detuning", "must be finite");
    require_unit_interval("eta_path", eta_path);
    require_nonnegative("c_qq", c_qq);
    require_nonnegative("c_pp", c_pp);
    if (gamma_eff) {
        require_positive("gamma_eff", *gamma_eff);
        if (*gamma_eff < d.gamma_m)
            throw ValidationError("gamma_eff", "must be >= gamma_m (feedback only adds damping)");
        if (d.omega_m / *gamma_eff <= 1)
            throw ValidationError("gamma_eff", "oscillator must stay underdamped");
    }
    if (n_c_override)
        require_nonnegative("n_c_override", *n_c_override);
}

double DerivedQuantities::phase_noise_transduction() const
{
    return 4.0 * omega_m * detuning / (kappa * kappa);
}

double intracavity_photons(const DeviceParams& device, const DriveParams& drive)
{
    const double photon_flux = drive.power_in / (constants::hbar * device.laser_frequency());
    const double lorentz = 1.0 + 4.0 * drive.detuning * drive.detuning / (device.kappa * device.kappa);
    return 4.0 * device.eta_c / device.kappa * photon_flux / lorentz;
}

DerivedQuantities derive(const DeviceParams& device, const DriveParams& drive)
{
    device.validate();
    drive.validate(device);

    DerivedQuantities q;
    q.omega_m = device.omega_m;
    q.gamma_m = device.gamma_m;
    q.gamma_eff = drive.effective_damping(device);
    q.mass_eff = device.mass_eff;
    q.kappa = device.kappa;
    q.detuning = drive.detuning;
    q.eta_c = device.eta_c;
    q.c_qq = drive.c_qq;
    q.c_pp = drive.c_pp;

    q.x_zp = std::sqrt(constants::hbar / (2.0 * device.mass_eff * device.omega_m));
    q.n_c = drive.n_c_override ? *drive.n_c_override : intracavity_photons(device, drive);
    q.g = device.g0 * std::sqrt(q.n_c);
    q.c0 = 4.0 * device.g0 * device.g0 / (device.kappa * device.gamma_m);
    q.coop = q.c0 * q.n_c;
    q.n_th = constants::k_B * device.temperature / (constants::hbar * device.omega_m);
    q.n_qba = q.coop;
    q.n_cba_q = q.c0 * q.n_c * drive.c_qq;
    const double tr = q.phase_noise_transduction();
    q.n_cba_p = q.c0 * q.n_c * tr * tr * drive.c_pp;
    q.eta_total = device.eta_c * drive.eta_path;
    return q;
}

double imprecision_occupation(const DerivedQuantities& dq)
{
    if (dq.coop <= 0 || dq.eta_total <= 0)
        throw NoMeasurementError("imprecision undefined without measurement (eta*C = 0)");
    return 1.0 / (16.0 * dq.eta_total * dq.coop);
}

} // namespace optocorr
