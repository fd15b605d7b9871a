#include "optocorr/spectra.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <cmath>

namespace optocorr {

using constants::hbar;

const char* to_string(SpectrumNorm n)
{
    switch (n) {
    case SpectrumNorm::ShotNoiseUnits: return "shot_noise_units";
    case SpectrumNorm::ForcePSD: return "force_psd_N2_per_Hz";
    case SpectrumNorm::DisplacementPSD: return "displacement_psd_m2_per_Hz";
    }
    return "?";
}

SpectrumNorm norm_from_string(const std::string& s)
{
    if (s == "shot_noise_units" || s == "snu")
        return SpectrumNorm::ShotNoiseUnits;
    if (s == "force_psd_N2_per_Hz" || s == "force")
        return SpectrumNorm::ForcePSD;
    if (s == "displacement_psd_m2_per_Hz" || s == "displacement")
        return SpectrumNorm::DisplacementPSD;
    throw ValidationError("norm", "unknown spectrum normalization '" + s + "'");
}

void Spectrum::validate() const
{
    if (grid.size() != values.size())
        throw ValidationError("spectrum", "grid and values differ in length");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || !std::isfinite(values[i]))
            throw ValidationError("spectrum", "non-finite entry at index " + std::to_string(i));
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ValidationError("spectrum", "grid not strictly increasing at index " + std::to_string(i));
        if (!signed_values && values[i] < 0)
            throw ValidationError("spectrum", "negative auto-spectrum value at index " + std::to_string(i));
    }
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(hi > lo))
        throw ValidationError("grid", "need n >= 2 and hi > lo");
    std::vector<double> g(n);
    const double step = (hi - lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + step * double(i);
    g.back() = hi;
    return g;
}

double s_ff_total(const DerivedQuantities& dq, const SpectrumOptions& opt)
{
    const double n = dq.n_th + dq.n_qba + (opt.include_zero_point ? 0.5 : 0.0);
    return hbar * hbar / (dq.x_zp * dq.x_zp) * dq.gamma_m * n;
}

double s_xx_total(const DerivedQuantities& dq, const Susceptibility& s, double omega,
                  const SpectrumOptions& opt)
{
    return std::norm(s(omega)) * s_ff_total(dq, opt);
}

double s_pq_out(const DerivedQuantities& dq, const Susceptibility& s, double omega)
{
    return dq.coop * dq.gamma_m * hbar * s(omega).real() / (dq.x_zp * dq.x_zp);
}

QuadratureSpectra detected_quadratures(const DerivedQuantities& dq, const Susceptibility& s,
                                       double omega, const SpectrumOptions& opt)
{
    const double rate = 4.0 * dq.eta_total * dq.coop * dq.gamma_m / (dq.x_zp * dq.x_zp);
    QuadratureSpectra q;
    q.qq = 1.0;
    q.pp = 1.0 + rate * s_xx_total(dq, s, omega, opt);
    q.pq = 2.0 * dq.eta_total * s_pq_out(dq, s, omega);
    return q;
}

double s_ii_homodyne(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                     double omega, const SpectrumOptions& opt)
{
    const double rate = 4.0 * dq.eta_total * dq.coop * dq.gamma_m / (dq.x_zp * dq.x_zp);
    const double sn = std::sin(theta);
    return 1.0 + rate * (sn * sn * s_xx_total(dq, s, omega, opt)
                         + std::sin(2.0 * theta) * 0.5 * hbar * s(omega).real());
}

double rotated_quadrature(const DerivedQuantities& dq, double theta)
{
    return theta - 4.0 * dq.detuning / dq.kappa;
}

namespace detail {

double s_ii_extended_quiet(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                           double omega, const SpectrumOptions& opt)
{
    const double tp = rotated_quadrature(dq, theta);
    const double s2 = std::sin(tp) * std::sin(tp);
    const double sin2 = std::sin(2.0 * tp);
    const std::complex<double> x = s(omega);
    const double chi2 = std::norm(x);
    const double force_unit = hbar * hbar / (dq.x_zp * dq.x_zp) * dq.gamma_m;

    const double sxx = chi2 * (s_ff_total(dq, opt) + force_unit * (dq.n_cba_q + dq.n_cba_p));
    const double leak = std::sqrt(dq.eta_c) * (1.0 - 2.0 * dq.eta_c);
    const double bracket = sxx * s2 + 0.5 * hbar * sin2 * x.real()
                           + hbar * sin2 * leak * dq.c_qq * x.real()
                           + 2.0 * hbar * s2 * leak * dq.phase_noise_transduction() * dq.c_pp * x.imag();
    const double rate = 4.0 * dq.eta_total * dq.coop * dq.gamma_m / (dq.x_zp * dq.x_zp);
    return 1.0 + rate * bracket;
}

double s_ii_approx_quiet(const DerivedQuantities& dq, double theta, double delta)
{
    // tails of |chi|^2 do not see the feedback damping, hence gamma_m
    const double ec = dq.eta_total * dq.coop;
    const double a = dq.gamma_m * std::sin(theta) / delta;
    return 1.0 + 4.0 * ec * dq.n_total() * a * a
           - 2.0 * ec * dq.gamma_m * std::sin(2.0 * theta) / delta;
}

} // namespace detail

namespace {

void check_detuning(const DerivedQuantities& dq)
{
    if (std::abs(dq.detuning) / dq.kappa > 0.1)
        warn("|detuning|/kappa = " + std::to_string(std::abs(dq.detuning) / dq.kappa)
             + " exceeds 0.1; first-order detuning expansion is unreliable");
}

} // namespace

double s_ii_extended(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                     double omega, const SpectrumOptions& opt)
{
    check_detuning(dq);
    return detail::s_ii_extended_quiet(dq, s, theta, omega, opt);
}

double s_ii_approx(const DerivedQuantities& dq, double theta, double delta)
{
    if (std::abs(delta) < 10.0 * dq.gamma_eff)
        warn("s_ii_approx used at |delta| < 10 Gamma; Lorentzian-tail form is inaccurate");
    return detail::s_ii_approx_quiet(dq, theta, delta);
}

Spectrum homodyne_spectrum(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                           const std::vector<double>& grid, const SpectrumOptions& opt)
{
    Spectrum out;
    out.grid = grid;
    out.values.reserve(grid.size());
    for (double w : grid)
        out.values.push_back(s_ii_homodyne(dq, s, theta, w, opt));
    out.theta = theta;
    return out;
}

Spectrum extended_spectrum(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                           const std::vector<double>& grid, const SpectrumOptions& opt)
{
    check_detuning(dq);
    Spectrum out;
    out.grid = grid;
    out.values.reserve(grid.size());
    for (double w : grid)
        out.values.push_back(detail::s_ii_extended_quiet(dq, s, theta, w, opt));
    out.theta = theta;
    return out;
}

Spectrum displacement_spectrum(const DerivedQuantities& dq, const Susceptibility& s,
                               const std::vector<double>& grid, const SpectrumOptions& opt)
{
    Spectrum out;
    out.grid = grid;
    out.norm = SpectrumNorm::DisplacementPSD;
    const double sff = s_ff_total(dq, opt);
    out.values.reserve(grid.size());
    for (double w : grid)
        out.values.push_back(std::norm(s(w)) * sff);
    return out;
}

Spectrum correlation_spectrum(const DerivedQuantities& dq, const Susceptibility& s,
                              const std::vector<double>& grid)
{
    Spectrum out;
    out.grid = grid;
    out.signed_values = true;
    out.values.reserve(grid.size());
    for (double w : grid)
        out.values.push_back(s_pq_out(dq, s, w));
    return out;
}

} // namespace optocorr
