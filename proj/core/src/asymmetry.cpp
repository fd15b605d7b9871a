#include "optocorr/asymmetry.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <algorithm>
#include <cmath>

namespace optocorr {

void BandSpec::validate() const
{
    if (!(width > 0) || !std::isfinite(width))
        throw ValidationError("band_width", "must be > 0");
    if (!(delta > width / 2))
        throw ValidationError("band_offset", "bands must not straddle the resonance (need delta > width/2)");
}

BandSpec default_band()
{
    return {constants::two_pi * 21e3, constants::two_pi * 20e3};
}

namespace {

constexpr double kDegenerateSin = 1e-12;

// (1 + x - y)/(1 + x + y): exact reciprocity under y -> -y
RatioResult tail_ratio(double x, double y, double sin_theta)
{
    if (std::abs(sin_theta) < kDegenerateSin)
        return {1.0, true};
    return {(1.0 + x - y) / (1.0 + x + y), false};
}

} // namespace

RatioResult r_theta_closed(const DerivedQuantities& dq, double theta, double delta)
{
    if (delta == 0)
        throw ValidationError("delta", "offset from resonance must be non-zero");
    const double ec = dq.eta_total * dq.coop;
    const double sn = std::sin(theta);
    const double a = dq.gamma_m * sn / delta;
    const double x = 4.0 * ec * dq.n_total() * a * a;
    const double y = 2.0 * ec * dq.gamma_m * std::sin(2.0 * theta) / delta;
    return tail_ratio(x, y, sn);
}

RatioResult r_theta_asymptotic(const DerivedQuantities& dq, double theta, double delta,
                               const CorrelationSources& src)
{
    if (delta == 0)
        throw ValidationError("delta", "offset from resonance must be non-zero");
    const double tp = rotated_quadrature(dq, theta);
    const double leak = std::sqrt(dq.eta_c) * (1.0 - 2.0 * dq.eta_c);
    double weight = src.quantum ? 1.0 : 0.0;
    double n = dq.n_th + dq.n_qba + dq.n_cba_q + dq.n_cba_p;
    if (src.classical) {
        weight += 2.0 * leak * dq.c_qq;
        // Im chi in the tails is Gamma_eff/(4 m Omega_m delta^2): even in delta, acts as extra occupation
        n += leak * dq.phase_noise_transduction() * dq.c_pp * dq.gamma_eff / dq.gamma_m;
    }
    const double ec = dq.eta_total * dq.coop;
    const double sn = std::sin(tp);
    const double a = dq.gamma_m * sn / delta;
    const double x = 4.0 * ec * n * a * a;
    const double y = 2.0 * ec * weight * dq.gamma_m * std::sin(2.0 * tp) / delta;
    return tail_ratio(x, y, sn);
}

namespace {

std::pair<std::size_t, std::size_t> band_indices(const Spectrum& spec, double lo, double hi)
{
    if (spec.grid.empty())
        throw BandError("empty spectrum");
    if (lo < spec.grid.front() || hi > spec.grid.back())
        throw BandError("band [" + std::to_string(lo) + ", " + std::to_string(hi)
                        + "] rad/s lies outside the spectrum grid");
    auto first = std::lower_bound(spec.grid.begin(), spec.grid.end(), lo);
    auto last = std::upper_bound(spec.grid.begin(), spec.grid.end(), hi);
    const auto i0 = std::size_t(first - spec.grid.begin());
    const auto i1 = std::size_t(last - spec.grid.begin());
    if (i1 < i0 + 8)
        throw BandError("band holds " + std::to_string(i1 - i0) + " grid points, need at least 8");
    return {i0, i1};
}

double trapezoid(const Spectrum& spec, std::size_t i0, std::size_t i1)
{
    double acc = 0;
    for (std::size_t i = i0; i + 1 < i1; ++i)
        acc += 0.5 * (spec.values[i] + spec.values[i + 1]) * (spec.grid[i + 1] - spec.grid[i]);
    return acc;
}

} // namespace

double band_power(const Spectrum& spec, double lo, double hi)
{
    const auto [i0, i1] = band_indices(spec, lo, hi);
    return trapezoid(spec, i0, i1);
}

double band_average(const Spectrum& spec, double lo, double hi)
{
    const auto [i0, i1] = band_indices(spec, lo, hi);
    return trapezoid(spec, i0, i1) / (spec.grid[i1 - 1] - spec.grid[i0]);
}

double r_theta_band(const Spectrum& spec_plus, const Spectrum& spec_minus, const BandSpec& band,
                    double omega_m)
{
    band.validate();
    const double h = band.width / 2;
    // band averages times the nominal width: the two bands may catch a different
    // number of native bins, and raw sums would carry that offset into the ratio
    const double up = band_average(spec_plus, omega_m + band.delta - h, omega_m + band.delta + h);
    const double dn = band_average(spec_minus, omega_m - band.delta - h, omega_m - band.delta + h);
    if (!(dn > 0))
        throw BandError("lower band has no power");
    return up / dn;
}

double r_theta_band_analytic(const std::function<double(double)>& spectrum, const BandSpec& band,
                             double omega_m, const QuadratureOptions& opt)
{
    band.validate();
    const double h = band.width / 2;
    const double up = integrate_adaptive(spectrum, omega_m + band.delta - h, omega_m + band.delta + h, {}, opt);
    const double dn = integrate_adaptive(spectrum, omega_m - band.delta - h, omega_m - band.delta + h, {}, opt);
    return up / dn;
}

double susceptibility_correction(const Susceptibility& s, const BandSpec& band,
                                 const QuadratureOptions& opt)
{
    band.validate();
    const double h = band.width / 2;
    const double om = s.omega_m();
    return lorentzian_band_integral(s, om - band.delta, h, opt)
           / lorentzian_band_integral(s, om + band.delta, h, opt);
}

double r_theta_corrected(double raw, const Susceptibility& s, const BandSpec& band,
                         const QuadratureOptions& opt)
{
    return raw * susceptibility_correction(s, band, opt);
}

DeltaR delta_r(const AsymmetryCurve& curve)
{
    if (curve.ratios.empty() || curve.ratios.size() != curve.thetas.size())
        throw ValidationError("curve", "empty curve or length mismatch");
    const auto [mn, mx] = std::minmax_element(curve.ratios.begin(), curve.ratios.end());
    DeltaR out;
    out.value = *mx - *mn;
    const auto imax = std::size_t(mx - curve.ratios.begin());
    const auto imin = std::size_t(mn - curve.ratios.begin());
    out.theta_max = curve.thetas[imax];
    out.theta_min = curve.thetas[imin];
    const std::size_t last = curve.ratios.size() - 1;
    if (out.value > 0 && (imax == 0 || imax == last || imin == 0 || imin == last)) {
        out.boundary_extremum = true;
        warn("asymmetry extremum lies at the edge of the sampled theta range");
    }
    return out;
}

double delta_r_asymptotic(const DerivedQuantities& dq)
{
    return 4.0 * std::sqrt(dq.eta_total * dq.n_qba / dq.n_th);
}

std::vector<double> theta_grid(std::size_t n)
{
    if (n < 2)
        throw ValidationError("theta_points", "need at least 2 points");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = -constants::pi / 2 + constants::pi * double(i + 1) / double(n);
    t.back() = constants::pi / 2;
    return t;
}

AsymmetryCurve closed_curve(const DerivedQuantities& dq, const BandSpec& band,
                            const std::vector<double>& thetas)
{
    band.validate();
    AsymmetryCurve c;
    c.band = band;
    c.thetas = thetas;
    c.ratios.reserve(thetas.size());
    for (double t : thetas)
        c.ratios.push_back(r_theta_closed(dq, t, band.delta).value);
    return c;
}

AsymmetryCurve model_curve(const DerivedQuantities& dq, const Susceptibility& s,
                           const BandSpec& band, const std::vector<double>& thetas,
                           bool corrected, const SpectrumOptions& opt)
{
    band.validate();
    if (std::abs(dq.detuning) / dq.kappa > 0.1)
        warn("|detuning|/kappa exceeds 0.1; first-order detuning expansion is unreliable");
    const double corr = corrected ? susceptibility_correction(s, band) : 1.0;
    AsymmetryCurve c;
    c.band = band;
    c.corrected = corrected;
    c.thetas = thetas;
    c.ratios.reserve(thetas.size());
    for (double t : thetas) {
        auto f = [&](double w) { return detail::s_ii_extended_quiet(dq, s, t, w, opt); };
        c.ratios.push_back(corr * r_theta_band_analytic(f, band, s.omega_m()));
    }
    return c;
}

ScalingFit fit_power_scaling(const std::vector<double>& powers, const std::vector<double>& deltas)
{
    if (powers.size() != deltas.size())
        throw FitError("powers and deltas differ in length");
    const std::size_t n = powers.size();
    if (n < 3)
        throw FitError("power scaling fit needs at least 3 points");
    for (std::size_t i = 0; i < n; ++i)
        if (!(powers[i] > 0) || !(deltas[i] > 0))
            throw FitError("powers and asymmetries must be positive for a log-log fit");
    const auto [pmin, pmax] = std::minmax_element(powers.begin(), powers.end());
    if (*pmax / *pmin < 10.0)
        throw FitError("powers must span at least one decade");

    double mx = 0, my = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(powers[i]);
        ly[i] = std::log(deltas[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx <= 0)
        throw FitError("singular design: all powers identical");

    ScalingFit f;
    f.points = n;
    f.exponent = sxy / sxx;
    const double b = my - f.exponent * mx;
    f.amplitude = std::exp(b);
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (b + f.exponent * lx[i]);
        sse += r * r;
    }
    const double s2 = n > 2 ? sse / double(n - 2) : 0.0;
    f.exponent_stderr = std::sqrt(s2 / sxx);
    f.log_amplitude_stderr = std::sqrt(s2 * (1.0 / double(n) + mx * mx / sxx));
    f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

} // namespace optocorr
