#include "optocorr/metrology.hpp"

#include "optocorr/asymmetry.hpp"
#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace optocorr {

using constants::hbar;
using constants::pi;
using constants::two_pi;

void ForceTone::validate() const
{
    if (!(freq > 0) || !std::isfinite(freq))
        throw ValidationError("tone.freq", "must be > 0");
    if (!(power >= 0) || !std::isfinite(power))
        throw ValidationError("tone.power", "must be >= 0");
}

namespace {

void require_measurement(const DerivedQuantities& dq)
{
    if (dq.coop <= 0 || dq.eta_total <= 0)
        throw NoMeasurementError("force estimator undefined without measurement (eta*C = 0)");
}

double s_qba(const DerivedQuantities& dq)
{
    return dq.coop * dq.gamma_m * hbar * hbar / (dq.x_zp * dq.x_zp);
}

double s_th(const DerivedQuantities& dq, const SpectrumOptions& opt)
{
    return hbar * hbar / (dq.x_zp * dq.x_zp) * dq.gamma_m
           * (dq.n_th + (opt.include_zero_point ? 0.5 : 0.0));
}

// imprecision at theta = pi/2
double s_imp_phase(const DerivedQuantities& dq, double chi2)
{
    return dq.x_zp * dq.x_zp / (4.0 * dq.eta_total * dq.coop * dq.gamma_m * chi2);
}

// estimator without thermal and external parts, as a function of cot(theta)
double added_noise(const DerivedQuantities& dq, std::complex<double> x, double cot)
{
    const double chi2 = std::norm(x);
    return s_qba(dq) + s_imp_phase(dq, chi2) * (1.0 + cot * cot) + hbar * cot * x.real() / chi2;
}

} // namespace

ForceBudgetRow force_estimator_spectrum(const DerivedQuantities& dq, const Susceptibility& s,
                                        double theta, double omega, double s_ext,
                                        const SpectrumOptions& opt)
{
    require_measurement(dq);
    const double sn = std::sin(theta);
    if (std::abs(sn) < 1e-12)
        throw DegenerateAngleError("force estimator diverges at sin(theta) = 0");
    const std::complex<double> x = s(omega);
    const double chi2 = std::norm(x);
    ForceBudgetRow r;
    r.omega = omega;
    r.theta = theta;
    r.s_ext = s_ext;
    r.s_th = s_th(dq, opt);
    r.s_qba = s_qba(dq);
    r.s_imp = s_imp_phase(dq, chi2) / (sn * sn);
    r.s_corr = hbar * (std::cos(theta) / sn) * x.real() / chi2;
    r.total = r.s_ext + r.s_th + r.s_qba + r.s_imp + r.s_corr;
    return r;
}

double theta_opt(const DerivedQuantities& dq, const Susceptibility& s, double omega)
{
    require_measurement(dq);
    const double cot = -(hbar / (dq.x_zp * dq.x_zp)) * 2.0 * dq.eta_total * dq.coop * dq.gamma_m
                       * s(omega).real();
    return std::atan2(1.0, cot);
}

double theta_opt_numeric(const DerivedQuantities& dq, const Susceptibility& s, double omega)
{
    require_measurement(dq);
    const std::complex<double> x = s(omega);
    // search in cot space mapped through theta so the bracket is finite
    auto f = [&](double th) { return added_noise(dq, x, std::cos(th) / std::sin(th)); };
    const double eps = 1e-9;
    const int bits = std::numeric_limits<double>::digits / 2;
    boost::uintmax_t iters = 500;
    auto r = boost::math::tools::brent_find_minima(f, eps, pi - eps, bits, iters);
    return r.first;
}

double backaction_multiplier(const DerivedQuantities& dq, const Susceptibility& s, double omega)
{
    const std::complex<double> x = s(omega);
    return 1.0 - dq.eta_total * x.real() * x.real() / std::norm(x);
}

double optimal_estimator(const DerivedQuantities& dq, const Susceptibility& s, double omega,
                         const SpectrumOptions& opt)
{
    require_measurement(dq);
    const double chi2 = std::norm(s(omega));
    return s_th(dq, opt) + s_imp_phase(dq, chi2) + s_qba(dq) * backaction_multiplier(dq, s, omega);
}

double xi_thermal(const DerivedQuantities& dq, const Susceptibility& s, double omega, double theta)
{
    if (dq.eta_total <= 0 || dq.coop <= 0)
        return 1.0;
    const double sn = std::sin(theta);
    if (std::abs(sn) < 1e-12)
        throw DegenerateAngleError("xi_thermal undefined at sin(theta) = 0");
    const std::complex<double> x = s(omega);
    return added_noise(dq, x, 0.0) / added_noise(dq, x, std::cos(theta) / sn);
}

double xi_thermal_opt(const DerivedQuantities& dq, const Susceptibility& s, double omega)
{
    if (dq.eta_total <= 0 || dq.coop <= 0)
        return 1.0;
    return xi_thermal(dq, s, omega, theta_opt(dq, s, omega));
}

double xi_external(const DerivedQuantities& dq, const Susceptibility& s, double omega,
                   const SpectrumOptions& opt)
{
    if (dq.eta_total <= 0 || dq.coop <= 0)
        return 1.0;
    const double chi2 = std::norm(s(omega));
    const double conventional = s_th(dq, opt) + s_imp_phase(dq, chi2) + s_qba(dq);
    return conventional / optimal_estimator(dq, s, omega, opt);
}

double xi_external_approx(const DerivedQuantities& dq, const Susceptibility& s, double omega)
{
    const std::complex<double> x = s(omega);
    return 1.0 + dq.eta_total * (dq.n_qba / dq.n_th) * x.real() * x.real() / std::norm(x);
}

double sn_ratio_closed(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                       const ForceTone& plus, const ForceTone& minus, const SpectrumOptions& opt)
{
    plus.validate();
    minus.validate();
    if (!(minus.power > 0))
        throw ValidationError("tone.power", "reference tone must carry power");
    const double r = s_ii_homodyne(dq, s, theta, plus.freq, opt) / s_ii_homodyne(dq, s, theta, minus.freq, opt);
    const double sus = std::norm(s(plus.freq)) / std::norm(s(minus.freq));
    return sus * (plus.power / minus.power) / r;
}

void SnBands::validate() const
{
    if (!(tone_width > 0) || !(noise_width > 0))
        throw ValidationError("sn_bands", "band widths must be > 0");
    if (noise_offset - noise_width / 2 < tone_width / 2)
        throw BandError("noise bands overlap the tone band");
}

SnBands default_sn_bands()
{
    const double f = two_pi * 3e3, n = two_pi * 5e3;
    return {f, n, f + n / 2};
}

double sn_band(const Spectrum& spec, double tone_center, const SnBands& b)
{
    b.validate();
    auto mean_density = [&](double c, double w) { return band_average(spec, c - w / 2, c + w / 2); };
    const double signal = mean_density(tone_center, b.tone_width);
    const double noise = 0.5 * (mean_density(tone_center + b.noise_offset, b.noise_width)
                                + mean_density(tone_center - b.noise_offset, b.noise_width));
    if (!(noise > 0))
        throw BandError("noise bands carry no power");
    return signal / noise;
}

std::vector<double> tone_force_psd(const std::vector<double>& grid, const std::vector<ForceTone>& tones,
                                   ToneShape shape, double linewidth)
{
    std::vector<double> out(grid.size(), 0.0);
    if (grid.size() < 2)
        return out;
    for (const auto& t : tones) {
        t.validate();
        // a line at +freq carries half the mean square in the two-sided convention;
        // densities are per dOmega/2pi
        const double weight = 0.5 * t.power;
        if (shape == ToneShape::DeltaOnGrid) {
            if (t.freq < grid.front() || t.freq > grid.back())
                continue;
            auto it = std::lower_bound(grid.begin(), grid.end(), t.freq);
            std::size_t i = std::size_t(it - grid.begin());
            if (i == grid.size())
                --i;
            else if (i > 0 && t.freq - grid[i - 1] < grid[i] - t.freq)
                --i;
            const double lo = i > 0 ? grid[i - 1] : grid[i];
            const double hi = i + 1 < grid.size() ? grid[i + 1] : grid[i];
            const double binw = 0.5 * (hi - lo);
            out[i] += two_pi * weight / binw;
        } else {
            if (!(linewidth > 0))
                throw ValidationError("linewidth", "Lorentzian tone needs a positive linewidth");
            const double hw = linewidth / 2;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double d = grid[k] - t.freq;
                out[k] += weight * linewidth / (d * d + hw * hw);
            }
        }
    }
    return out;
}

void add_tones_homodyne(Spectrum& spec, const DerivedQuantities& dq, const Susceptibility& s,
                        double theta, const std::vector<ForceTone>& tones, ToneShape shape)
{
    const auto f = tone_force_psd(spec.grid, tones, shape, dq.gamma_eff);
    const double rate = 4.0 * dq.eta_total * dq.coop * dq.gamma_m / (dq.x_zp * dq.x_zp);
    const double s2 = std::sin(theta) * std::sin(theta);
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (f[i] != 0)
            spec.values[i] += rate * s2 * std::norm(s(spec.grid[i])) * f[i];
}

double tone_power_for_snr(const DerivedQuantities& dq, const Susceptibility& s,
                          const std::vector<double>& grid, double freq, const SnBands& bands,
                          double snr, const SpectrumOptions& opt)
{
    if (!(snr > 0))
        throw ValidationError("tone_snr", "must be > 0");
    // sn_band - 1 is linear in the tone power, so one trial fixes the scale
    auto spec = homodyne_spectrum(dq, s, pi / 2, grid, opt);
    const double trial = 1.0;
    add_tones_homodyne(spec, dq, s, pi / 2, {{freq, trial}});
    const double gain = sn_band(spec, freq, bands) - 1.0;
    if (!(gain > 0))
        throw NoMeasurementError("tone is not transduced into the photocurrent");
    return trial * snr / gain;
}

namespace {

ForceBudget budget_impl(const DerivedQuantities& dq, const Susceptibility& s,
                        const std::vector<double>& grid, const std::vector<ForceTone>& tones,
                        ToneShape shape, const SpectrumOptions& opt, const double* fixed_theta)
{
    ForceBudget b;
    b.grid = grid;
    const auto ext = tone_force_psd(grid, tones, shape, dq.gamma_eff);
    const std::size_t n = grid.size();
    for (auto* v : {&b.s_ext, &b.s_th, &b.s_qba, &b.s_imp, &b.s_corr, &b.total, &b.theta})
        v->reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = fixed_theta ? *fixed_theta : theta_opt(dq, s, grid[i]);
        const auto r = force_estimator_spectrum(dq, s, th, grid[i], ext[i], opt);
        b.s_ext.push_back(r.s_ext);
        b.s_th.push_back(r.s_th);
        b.s_qba.push_back(r.s_qba);
        b.s_imp.push_back(r.s_imp);
        b.s_corr.push_back(r.s_corr);
        b.total.push_back(r.total);
        b.theta.push_back(th);
    }
    return b;
}

} // namespace

ForceBudget force_budget(const DerivedQuantities& dq, const Susceptibility& s, double theta,
                         const std::vector<double>& grid, const std::vector<ForceTone>& tones,
                         ToneShape shape, const SpectrumOptions& opt)
{
    return budget_impl(dq, s, grid, tones, shape, opt, &theta);
}

ForceBudget force_budget_opt(const DerivedQuantities& dq, const Susceptibility& s,
                             const std::vector<double>& grid, const std::vector<ForceTone>& tones,
                             ToneShape shape, const SpectrumOptions& opt)
{
    return budget_impl(dq, s, grid, tones, shape, opt, nullptr);
}

} // namespace optocorr
