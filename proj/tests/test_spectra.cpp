#include <doctest.h>

#include "fixtures.hpp"

#include <optocorr/constants.hpp>
#include <optocorr/error.hpp>
#include <optocorr/response.hpp>
#include <optocorr/spectra.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace optocorr;
using fixtures::two_pi;

namespace {

struct Setup {
    DeviceParams d = fixtures::room_temperature_device();
    DriveParams v = fixtures::room_temperature_drive(25e-6);
    DerivedQuantities dq = derive(d, v);
    Susceptibility s = Susceptibility::for_device(d, v);
};

struct WarningTrap {
    std::vector<std::string> seen;
    WarningTrap()
    {
        set_warning_handler([this](const std::string& m) { seen.push_back(m); });
    }
    ~WarningTrap() { set_warning_handler({}); }
};

} // namespace

TEST_CASE("amplitude quadrature carries pure shot noise")
{
    Setup k;
    for (double w = k.d.omega_m * 0.5; w < k.d.omega_m * 1.5; w += k.d.omega_m / 311)
        CHECK(s_ii_homodyne(k.dq, k.s, 0.0, w) == 1.0);
    auto v = k.v;
    v.power_in = 0;
    const auto dq0 = derive(k.d, v);
    for (double t : {0.0, 0.3, 1.2, -0.7})
        CHECK(s_ii_homodyne(dq0, k.s, t, k.d.omega_m * 1.001) == 1.0);
}

TEST_CASE("displacement spectrum on resonance and the vacuum peak")
{
    Setup k;
    auto v = k.v;
    v.gamma_eff.reset();
    const auto dq = derive(k.d, v);
    const auto s = Susceptibility::for_device(k.d, v);
    const double n = dq.n_total() + 0.5;
    CHECK(s_xx_total(dq, s, k.d.omega_m) == doctest::Approx(4 * dq.x_zp * dq.x_zp / k.d.gamma_m * n).epsilon(1e-10));

    DerivedQuantities vac = dq;
    vac.n_th = 0;
    vac.n_qba = 0;
    CHECK(s_xx_total(vac, s, k.d.omega_m) == doctest::Approx(2 * dq.x_zp * dq.x_zp / k.d.gamma_m).epsilon(1e-10));
}

TEST_CASE("variance of the motion is x_zp^2 (2 n + 1)")
{
    Setup k;
    auto v = k.v;
    v.gamma_eff.reset();
    const auto dq = derive(k.d, v);
    const auto s = Susceptibility::for_device(k.d, v);
    const double om = k.d.omega_m;
    // two-sided density: integrate over (0, inf) and double
    const double area = 2.0 * integrate_adaptive([&](double w) { return s_xx_total(dq, s, w); }, 0.0, 40 * om,
                                                 {om - 10 * k.d.gamma_m, om, om + 10 * k.d.gamma_m},
                                                 {1e-10, 1e-7, 30})
                        / two_pi;
    CHECK(area == doctest::Approx(dq.x_zp * dq.x_zp * (2 * dq.n_total() + 1)).epsilon(1e-5));
}

TEST_CASE("ponderomotive correlation sign")
{
    Setup k;
    const double om = k.d.omega_m;
    CHECK(std::abs(s_pq_out(k.dq, k.s, om)) < 1e-12 * std::abs(s_pq_out(k.dq, k.s, om * 1.01)));
    CHECK(s_pq_out(k.dq, k.s, om * 0.99) > 0);
    CHECK(s_pq_out(k.dq, k.s, om * 1.01) < 0);
    auto v = k.v;
    v.power_in = 0;
    CHECK(s_pq_out(derive(k.d, v), k.s, om * 0.99) == 0.0);
}

TEST_CASE("on resonance the 45 degree quadrature sees half the motion")
{
    Setup k;
    const double om = k.d.omega_m;
    const double rate = 4 * k.dq.eta_total * k.dq.coop * k.dq.gamma_m / (k.dq.x_zp * k.dq.x_zp);
    const double expected = 1 + rate * 0.5 * std::norm(k.s(om)) * s_ff_total(k.dq);
    CHECK(s_ii_homodyne(k.dq, k.s, M_PI / 4, om) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("phase quadrature is symmetric about resonance")
{
    Setup k;
    for (double d : {two_pi * 5e3, two_pi * 21e3, two_pi * 60e3}) {
        const double up = s_ii_homodyne(k.dq, k.s, M_PI / 2, k.d.omega_m + d) - 1;
        const double dn = s_ii_homodyne(k.dq, k.s, M_PI / 2, k.d.omega_m - d) - 1;
        CHECK(std::abs(up / dn - 1) < 3 * d / k.d.omega_m);
    }
}

TEST_CASE("quadrature decomposition identity")
{
    Setup k;
    for (double t = -M_PI; t <= M_PI; t += 0.173) {
        for (double w = k.d.omega_m * 0.97; w < k.d.omega_m * 1.03; w += k.d.omega_m / 1777) {
            const auto q = detected_quadratures(k.dq, k.s, w);
            const double c = std::cos(t), sn = std::sin(t);
            const double combo = c * c * q.qq + sn * sn * q.pp + std::sin(2 * t) * q.pq;
            CHECK(s_ii_homodyne(k.dq, k.s, t, w) == doctest::Approx(combo).epsilon(1e-12));
        }
    }
}

TEST_CASE("tail approximation agrees with the full spectrum far from resonance")
{
    Setup k;
    const double delta = 2e3 * k.d.gamma_m;
    for (double t : {0.05, 0.2, M_PI / 4, 1.3}) {
        for (double dd : {delta, -delta}) {
            const double exact = s_ii_homodyne(k.dq, k.s, t, k.d.omega_m + dd);
            const double approx = s_ii_approx(k.dq, t, dd);
            CHECK(std::abs(approx / exact - 1) < 1e-2);
        }
    }
    CHECK(s_ii_approx(k.dq, 0.0, delta) == 1.0);
}

TEST_CASE("lower sideband exceeds the upper one for 0 < theta < pi/2")
{
    Setup k;
    const double delta = two_pi * 21e3;
    for (double t = 0.01; t < M_PI / 2 - 0.01; t += 0.05) {
        CHECK(s_ii_homodyne(k.dq, k.s, t, k.d.omega_m - delta) > s_ii_homodyne(k.dq, k.s, t, k.d.omega_m + delta));
        CHECK(s_ii_approx(k.dq, t, -delta) > s_ii_approx(k.dq, t, delta));
    }
}

TEST_CASE("shot-noise floor is recovered far from resonance")
{
    Setup k;
    // decoherence bandwidth Gamma_m (n_th + n_QBA)
    const double gdec = k.dq.gamma_m * k.dq.n_total();
    for (double t : {0.1, 0.8, M_PI / 2, -1.0}) {
        CHECK(std::abs(s_ii_homodyne(k.dq, k.s, t, k.d.omega_m + 1e3 * gdec) - 1) < 1e-3);
    }
}

TEST_CASE("excess noise in the phase quadrature is linear in eta C")
{
    Setup k;
    auto v = k.v;
    v.power_in = 1e-6;
    const auto a = derive(k.d, v);
    v.power_in = 2e-6;
    const auto b = derive(k.d, v);
    REQUIRE(a.n_qba < 1e-3 * a.n_th);
    const double w = k.d.omega_m + two_pi * 10e3;
    const double ra = s_ii_homodyne(a, k.s, M_PI / 2, w) - 1;
    const double rb = s_ii_homodyne(b, k.s, M_PI / 2, w) - 1;
    CHECK(rb / ra == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("extended spectrum reduces to the homodyne one")
{
    Setup k;
    for (double t : {-1.1, -0.2, 0.0, 0.35, 1.5})
        for (double w = k.d.omega_m * 0.99; w < k.d.omega_m * 1.01; w += k.d.omega_m / 997)
            CHECK(detail::s_ii_extended_quiet(k.dq, k.s, t, w, {})
                  == doctest::Approx(s_ii_homodyne(k.dq, k.s, t, w)).epsilon(1e-13));
}

TEST_CASE("residual detuning rotates the detected quadrature")
{
    Setup k;
    auto v = k.v;
    v.detuning = 0.01 * k.d.kappa;
    const auto dq = derive(k.d, v);
    CHECK(rotated_quadrature(dq, 0.3) == doctest::Approx(0.3 - 0.04));
    for (double t : {-0.5, 0.04, 0.3})
        for (double w : {k.d.omega_m * 0.995, k.d.omega_m * 1.003})
            CHECK(detail::s_ii_extended_quiet(dq, k.s, t, w, {})
                  == doctest::Approx(s_ii_homodyne(dq, k.s, t - 0.04, w)).epsilon(1e-13));
}

TEST_CASE("classical amplitude noise is a small correction to the correlation")
{
    Setup k;
    auto v = k.v;
    v.c_qq = 5e-3;
    k.d.eta_c = 0.3; // away from 1/2 so the leakage term is non-zero
    const auto dq = derive(k.d, v);
    const double leak = std::sqrt(dq.eta_c) * (1 - 2 * dq.eta_c);
    const double t = 0.05, w = k.d.omega_m + two_pi * 21e3;
    const double hbar = constants::hbar;
    const double quantum = 0.5 * hbar * std::sin(2 * t) * k.s(w).real();
    const double excess = hbar * std::sin(2 * t) * leak * dq.c_qq * k.s(w).real();
    CHECK(std::abs(excess / quantum) <= 0.01);

    // at eta_c = 1/2 the excess correlation vanishes and only the back-action heating remains
    k.d.eta_c = 0.5;
    const auto dq2 = derive(k.d, v);
    const double rate = 4 * dq2.eta_total * dq2.coop * dq2.gamma_m / (dq2.x_zp * dq2.x_zp);
    const double extra = rate * std::sin(t) * std::sin(t) * std::norm(k.s(w)) * hbar * hbar
                         / (dq2.x_zp * dq2.x_zp) * dq2.gamma_m * dq2.n_cba_q;
    CHECK(detail::s_ii_extended_quiet(dq2, k.s, t, w, {}) - s_ii_homodyne(dq2, k.s, t, w)
          == doctest::Approx(extra).epsilon(1e-6));
}

TEST_CASE("zero-point flag drops the half quantum")
{
    Setup k;
    SpectrumOptions o;
    o.include_zero_point = false;
    const double full = s_ff_total(k.dq), strict = s_ff_total(k.dq, o);
    const double unit = constants::hbar * constants::hbar / (k.dq.x_zp * k.dq.x_zp) * k.dq.gamma_m;
    CHECK(full - strict == doctest::Approx(0.5 * unit).epsilon(1e-6));
}

TEST_CASE("warnings outside the validity range")
{
    Setup k;
    WarningTrap trap;
    s_ii_approx(k.dq, 0.3, 2 * k.dq.gamma_eff);
    CHECK(trap.seen.size() == 1);
    s_ii_approx(k.dq, 0.3, 20 * k.dq.gamma_eff);
    CHECK(trap.seen.size() == 1);
    auto v = k.v;
    v.detuning = 0.2 * k.d.kappa;
    s_ii_extended(derive(k.d, v), k.s, 0.3, k.d.omega_m);
    CHECK(trap.seen.size() == 2);
}

TEST_CASE("grid spectra carry their normalization")
{
    Setup k;
    const auto g = linear_grid(k.d.omega_m * 0.99, k.d.omega_m * 1.01, 101);
    CHECK(homodyne_spectrum(k.dq, k.s, 0.2, g).norm == SpectrumNorm::ShotNoiseUnits);
    CHECK(displacement_spectrum(k.dq, k.s, g).norm == SpectrumNorm::DisplacementPSD);
    auto c = correlation_spectrum(k.dq, k.s, g);
    CHECK(c.signed_values);
    CHECK_NOTHROW(c.validate());
    c.signed_values = false;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK(norm_from_string(to_string(SpectrumNorm::ForcePSD)) == SpectrumNorm::ForcePSD);
    CHECK_THROWS_AS(norm_from_string("dB"), ValidationError);
}
