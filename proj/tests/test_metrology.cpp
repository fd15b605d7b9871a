#include <doctest.h>

#include "fixtures.hpp"

#include <optocorr/error.hpp>
#include <optocorr/metrology.hpp>

#include <cmath>
#include <vector>

using namespace optocorr;
using fixtures::two_pi;

namespace {

struct Setup {
    DeviceParams d = fixtures::room_temperature_device();
    DriveParams v = fixtures::room_temperature_drive(25e-6);
    DerivedQuantities dq = derive(d, v);
    Susceptibility s = Susceptibility::for_device(d, v);
    double om = d.omega_m;
};

} // namespace

TEST_CASE("correlation term vanishes in phase quadrature and on resonance")
{
    Setup k;
    CHECK(force_estimator_spectrum(k.dq, k.s, M_PI / 2, k.om * 1.003).s_corr
          == doctest::Approx(0.0).epsilon(1e-30).scale(1.0));
    for (double t : {0.1, 0.7, 2.0}) {
        const auto r = force_estimator_spectrum(k.dq, k.s, t, k.om);
        CHECK(std::abs(r.s_corr) < 1e-12 * r.total);
    }
    const auto r = force_estimator_spectrum(k.dq, k.s, 0.4, k.om * 0.99, 1e-30);
    CHECK(r.total == doctest::Approx(r.s_ext + r.s_th + r.s_qba + r.s_imp + r.s_corr));
    CHECK(r.s_imp > 0);
}

TEST_CASE("estimator components")
{
    Setup k;
    const double w = k.om + two_pi * 30e3;
    const auto r = force_estimator_spectrum(k.dq, k.s, 0.6, w);
    const double hb = constants::hbar;
    CHECK(r.s_qba == doctest::Approx(k.dq.coop * k.dq.gamma_m * hb * hb / (k.dq.x_zp * k.dq.x_zp)));
    const double imp = k.dq.x_zp * k.dq.x_zp
                       / (4 * k.dq.eta_total * k.dq.coop * k.dq.gamma_m * std::norm(k.s(w)) * std::pow(std::sin(0.6), 2));
    CHECK(r.s_imp == doctest::Approx(imp).epsilon(1e-12));
    CHECK(r.s_corr == doctest::Approx(hb / std::tan(0.6) * k.s(w).real() / std::norm(k.s(w))).epsilon(1e-12));
}

TEST_CASE("a correlated quadrature beats the phase quadrature")
{
    Setup k;
    int better = 0;
    for (double w = k.om - two_pi * 100e3; w < k.om + two_pi * 100e3; w += two_pi * 7e3) {
        const double ref = force_estimator_spectrum(k.dq, k.s, M_PI / 2, w).total;
        for (double t = 0.05; t < M_PI; t += 0.05) {
            const auto r = force_estimator_spectrum(k.dq, k.s, t, w);
            if (r.s_corr < 0 && -r.s_corr > r.s_imp - force_estimator_spectrum(k.dq, k.s, M_PI / 2, w).s_imp) {
                CHECK(r.total < ref);
                ++better;
            }
        }
    }
    CHECK(better > 0);
}

TEST_CASE("degenerate angle and missing measurement")
{
    Setup k;
    CHECK_THROWS_AS(force_estimator_spectrum(k.dq, k.s, 0.0, k.om), DegenerateAngleError);
    CHECK_THROWS_AS(force_estimator_spectrum(k.dq, k.s, M_PI, k.om), DegenerateAngleError);
    auto v = k.v;
    v.power_in = 0;
    CHECK_THROWS_AS(force_estimator_spectrum(derive(k.d, v), k.s, 1.0, k.om), NoMeasurementError);
}

TEST_CASE("optimal angle")
{
    Setup k;
    CHECK(theta_opt(k.dq, k.s, k.om) == doctest::Approx(M_PI / 2).epsilon(1e-12));
    const double above = theta_opt(k.dq, k.s, k.om * 1.01);
    CHECK(above < M_PI / 2);
    CHECK(above > 0);
    CHECK(theta_opt(k.dq, k.s, k.om * 0.99) > M_PI / 2);
}

TEST_CASE("estimator at the optimal angle matches the closed form")
{
    Setup k;
    for (double w = k.om - two_pi * 200e3; w <= k.om + two_pi * 200e3; w += two_pi * 3.3e3) {
        const double t = theta_opt(k.dq, k.s, w);
        const double total = force_estimator_spectrum(k.dq, k.s, t, w).total;
        CHECK(total == doctest::Approx(optimal_estimator(k.dq, k.s, w)).epsilon(1e-10));
        const double tn = theta_opt_numeric(k.dq, k.s, w);
        const double total_n = force_estimator_spectrum(k.dq, k.s, tn, w).total;
        CHECK(total_n == doctest::Approx(total).epsilon(1e-9));
        CHECK(total_n >= total * (1 - 1e-14));
    }
}

TEST_CASE("minimum over a theta scan agrees with the optimal form")
{
    Setup k;
    auto v = k.v;
    v.power_in = 1e-3; // C >> 1
    const auto dq = derive(k.d, v);
    for (double w : {k.om - two_pi * 20e3, k.om + two_pi * 5e3, k.om + two_pi * 80e3}) {
        double best = 1e300;
        for (double t = 1e-4; t < M_PI; t += 1e-4)
            best = std::min(best, force_estimator_spectrum(dq, k.s, t, w).total);
        CHECK(best == doctest::Approx(optimal_estimator(dq, k.s, w)).epsilon(0.01));
    }
}

TEST_CASE("back-action multiplier bounds")
{
    Setup k;
    for (double w = k.om * 0.5; w < k.om * 1.5; w += k.om / 5003) {
        const double m = backaction_multiplier(k.dq, k.s, w);
        CHECK(m >= 1 - k.dq.eta_total - 1e-15);
        CHECK(m <= 1.0);
    }
}

TEST_CASE("enhancement factors")
{
    Setup k;
    CHECK(xi_thermal_opt(k.dq, k.s, k.om) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(xi_external(k.dq, k.s, k.om) == doctest::Approx(1.0).epsilon(1e-12));
    for (double w = k.om - two_pi * 100e3; w < k.om + two_pi * 100e3; w += two_pi * 1.7e3) {
        CHECK(xi_thermal_opt(k.dq, k.s, w) >= 1.0 - 1e-14);
        CHECK(xi_external(k.dq, k.s, w) >= 1.0 - 1e-14);
        CHECK(xi_thermal_opt(k.dq, k.s, w) <= 1.0 / (1.0 - k.dq.eta_total) + 1e-12);
    }
    auto v = k.v;
    v.eta_path = 0;
    const auto blind = derive(k.d, v);
    CHECK(xi_thermal(blind, k.s, k.om * 1.01, 0.3) == 1.0);
    CHECK(xi_thermal_opt(blind, k.s, k.om * 1.01) == 1.0);
}

TEST_CASE("external force enhancement is tiny and linear in power")
{
    DerivedQuantities dq;
    dq.eta_total = 0.25;
    dq.n_th = 1e6;
    dq.n_qba = 1e3;
    // far off resonance |Re chi| / |chi| -> 1
    const auto s = Susceptibility::viscous(1e-15, 1.0, 1e-6);
    CHECK(xi_external_approx(dq, s, 100.0) == doctest::Approx(1.00025).epsilon(1e-8));

    Setup k;
    // close enough to resonance that imprecision is negligible against thermal noise
    const double w = k.om + two_pi * 20e3;
    auto v = k.v;
    const double a = xi_external(k.dq, k.s, w) - 1;
    v.power_in *= 2;
    const double b = xi_external(derive(k.d, v), k.s, w) - 1;
    CHECK(b / a == doctest::Approx(2.0).epsilon(0.01));
    CHECK(a == doctest::Approx(xi_external_approx(k.dq, k.s, w) - 1).epsilon(0.02));
}

TEST_CASE("two-tone signal-to-noise ratio")
{
    Setup k;
    const double delta = two_pi * 20e3;
    const ForceTone up{k.om + delta, 1e-30}, dn{k.om - delta, 1e-30};
    const double sus = std::norm(k.s(up.freq)) / std::norm(k.s(dn.freq));
    CHECK(std::abs(sn_ratio_closed(k.dq, k.s, M_PI / 2, up, dn) - 1) < 3 * delta / k.om);
    CHECK(std::abs(sus - 1) < 3 * delta / k.om);
    for (double t = 0.05; t < 1.5; t += 0.1) {
        const double a = sn_ratio_closed(k.dq, k.s, t, up, dn);
        const double b = sn_ratio_closed(k.dq, k.s, t, dn, up);
        CHECK(a * b == doctest::Approx(1.0).epsilon(1e-14));
        const double r = s_ii_homodyne(k.dq, k.s, t, up.freq) / s_ii_homodyne(k.dq, k.s, t, dn.freq);
        CHECK(a == doctest::Approx(sus / r).epsilon(1e-12));
    }
}

TEST_CASE("band signal-to-noise estimator")
{
    const double b = 2.0;
    const auto grid = linear_grid(0.0, two_pi * 40e3, 40001);
    Spectrum flat;
    flat.grid = grid;
    flat.values.assign(grid.size(), b);
    const double fc = two_pi * 20e3;
    const auto bands = default_sn_bands();
    CHECK(sn_band(flat, fc, bands) == doctest::Approx(1.0).epsilon(1e-12));

    // delta line of integrated power P in one interior bin
    Spectrum tone = flat;
    const double pt = 7e3;
    const std::size_t i = 20000;
    const double binw = grid[1] - grid[0];
    tone.values[i] += pt / binw;
    CHECK(sn_band(tone, fc, bands) == doctest::Approx(1 + pt / (b * bands.tone_width)).epsilon(2e-3));

    SnBands bad = bands;
    bad.noise_offset = bands.tone_width / 2;
    CHECK_THROWS_AS(sn_band(flat, fc, bad), BandError);
    CHECK_THROWS_AS(sn_band(flat, two_pi * 39e3, bands), BandError);
}

TEST_CASE("tone shapes carry the stated mean square")
{
    const auto grid = linear_grid(two_pi * 90e3, two_pi * 110e3, 20001);
    const std::vector<ForceTone> tones{{two_pi * 100e3, 3e-30}};
    for (auto shape : {ToneShape::DeltaOnGrid, ToneShape::Lorentzian}) {
        const auto f = tone_force_psd(grid, tones, shape, two_pi * 10.0);
        double area = 0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            area += 0.5 * (f[i] + f[i + 1]) * (grid[i + 1] - grid[i]);
        // positive frequencies hold half of <dF^2>
        CHECK(area / two_pi == doctest::Approx(1.5e-30).epsilon(shape == ToneShape::Lorentzian ? 2e-3 : 1e-9));
    }
}

TEST_CASE("force budget grids")
{
    Setup k;
    const auto g = linear_grid(k.om - two_pi * 50e3, k.om + two_pi * 50e3, 201);
    const auto b = force_budget_opt(k.dq, k.s, g, {{k.om + two_pi * 10e3, 1e-30}});
    REQUIRE(b.total.size() == g.size());
    double ext = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(b.total[i] == doctest::Approx(b.s_ext[i] + b.s_th[i] + b.s_qba[i] + b.s_imp[i] + b.s_corr[i]));
        CHECK(b.s_imp[i] >= 0);
        ext += b.s_ext[i];
    }
    CHECK(ext > 0);
    const auto fixed = force_budget(k.dq, k.s, M_PI / 2, g);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(fixed.total[i] >= b.total[i] - b.s_ext[i] - 1e-12 * fixed.total[i]);
}
