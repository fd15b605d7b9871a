#pragma once

#include <optocorr/constants.hpp>
#include <optocorr/params.hpp>
#include <optocorr/response.hpp>

namespace fixtures {

using optocorr::constants::two_pi;

// Room-temperature nanobeam in a microdisk cavity.
inline optocorr::DeviceParams room_temperature_device()
{
    optocorr::DeviceParams d;
    d.omega_m = two_pi * 3.4e6;
    d.gamma_m = two_pi * 12.0;
    d.mass_eff = 1.94e-15;
    d.kappa = two_pi * 4.5e9;
    d.eta_c = 0.5;
    d.g0 = two_pi * 60e3;
    d.wavelength = 780e-9;
    d.temperature = 300.0;
    return d;
}

inline optocorr::DriveParams room_temperature_drive(double power_w, bool feedback = true)
{
    optocorr::DriveParams v;
    v.power_in = power_w;
    v.eta_path = 0.5;
    if (feedback)
        v.gamma_eff = two_pi * 1e3;
    return v;
}

// Scaled-down oscillator used for time-domain runs: 50 kHz, Q = 500,
// n_th = 1000, C = 100, eta = 0.25.
inline optocorr::DeviceParams desk_device()
{
    optocorr::DeviceParams d;
    d.omega_m = two_pi * 50e3;
    d.gamma_m = d.omega_m / 500.0;
    d.mass_eff = 1e-12;
    d.kappa = two_pi * 50e6;
    d.eta_c = 0.5;
    d.g0 = two_pi * 1e3;
    d.wavelength = 1550e-9;
    d.temperature = 1000.0 * optocorr::constants::hbar * d.omega_m / optocorr::constants::k_B;
    return d;
}

inline optocorr::DriveParams desk_drive(double coop = 100.0)
{
    const auto d = desk_device();
    optocorr::DriveParams v;
    v.eta_path = 0.5;
    const double c0 = 4.0 * d.g0 * d.g0 / (d.kappa * d.gamma_m);
    v.n_c_override = coop / c0;
    return v;
}

} // namespace fixtures
