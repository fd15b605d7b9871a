#include <doctest.h>

#include "fixtures.hpp"

#include <optocorr/error.hpp>
#include <optocorr/params.hpp>

#include <cmath>
#include <cstring>

using namespace optocorr;
using fixtures::two_pi;

TEST_CASE("single-photon cooperativity of the room-temperature device")
{
    const auto dq = derive(fixtures::room_temperature_device(), fixtures::room_temperature_drive(25e-6));
    // 4 g0^2 / (kappa Gamma_m) with the 2 pi factors cancelled by hand
    const double expected = 4.0 * 60e3 * 60e3 / (4.5e9 * 12.0);
    CHECK(dq.c0 == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(dq.c0 - 0.267) < 0.005);
}

TEST_CASE("thermal occupation and zero-point amplitude")
{
    const auto dq = derive(fixtures::room_temperature_device(), fixtures::room_temperature_drive(25e-6));
    const double nth = 1.380649e-23 * 300.0 / (1.054571817e-34 * 2 * M_PI * 3.4e6);
    CHECK(dq.n_th == doctest::Approx(nth).epsilon(1e-9));
    CHECK(dq.n_th == doctest::Approx(1.84e6).epsilon(0.005));
    const double xzp = std::sqrt(1.054571817e-34 / (2 * 1.94e-15 * 2 * M_PI * 3.4e6));
    CHECK(dq.x_zp == doctest::Approx(xzp).epsilon(1e-9));
    CHECK(dq.x_zp == doctest::Approx(3.6e-14).epsilon(0.02));
}

TEST_CASE("zero drive gives no photons and no back-action")
{
    const auto dq = derive(fixtures::room_temperature_device(), fixtures::room_temperature_drive(0.0));
    CHECK(dq.n_c == 0.0);
    CHECK(dq.coop == 0.0);
    CHECK(dq.n_qba == 0.0);
    CHECK(dq.g == 0.0);
    CHECK_THROWS_AS(imprecision_occupation(dq), NoMeasurementError);
}

TEST_CASE("intracavity photons on resonance")
{
    const auto d = fixtures::room_temperature_device();
    const auto v = fixtures::room_temperature_drive(25e-6);
    const auto dq = derive(d, v);
    const double omega_l = 2 * M_PI * 299792458.0 / 780e-9;
    const double flux = 25e-6 / (1.054571817e-34 * omega_l);
    CHECK(dq.n_c == doctest::Approx(4 * 0.5 / d.kappa * flux).epsilon(1e-9)); // hbar rounded above
    CHECK(dq.coop == doctest::Approx(dq.c0 * dq.n_c).epsilon(1e-15));
    CHECK(dq.n_qba == dq.coop);
    CHECK(dq.eta_total == doctest::Approx(0.25));
}

TEST_CASE("detuning reduces photon number by the cavity Lorentzian")
{
    const auto d = fixtures::room_temperature_device();
    auto v = fixtures::room_temperature_drive(25e-6);
    const double n0 = derive(d, v).n_c;
    v.detuning = d.kappa / 2; // 1 + 4 Delta^2/kappa^2 = 2
    CHECK(derive(d, v).n_c == doctest::Approx(n0 / 2).epsilon(1e-12));
}

TEST_CASE("photon number and cooperativities are linear in power")
{
    const auto d = fixtures::room_temperature_device();
    auto v1 = fixtures::room_temperature_drive(10e-6);
    v1.c_qq = 3e-3;
    v1.c_pp = 1e-2;
    v1.detuning = two_pi * 1e6;
    auto v3 = v1;
    v3.power_in = 30e-6;
    const auto a = derive(d, v1), b = derive(d, v3);
    CHECK(b.n_c == doctest::Approx(3 * a.n_c).epsilon(1e-12));
    CHECK(b.coop == doctest::Approx(3 * a.coop).epsilon(1e-12));
    CHECK(b.n_cba_q == doctest::Approx(3 * a.n_cba_q).epsilon(1e-12));
    CHECK(a.n_cba_q == doctest::Approx(a.coop * 3e-3).epsilon(1e-12));
    const double tr = 4 * d.omega_m * v1.detuning / (d.kappa * d.kappa);
    CHECK(a.n_cba_p == doctest::Approx(a.coop * tr * tr * 1e-2).epsilon(1e-12));
}

TEST_CASE("photon number override")
{
    auto v = fixtures::room_temperature_drive(25e-6);
    v.n_c_override = 1e5;
    const auto dq = derive(fixtures::room_temperature_device(), v);
    CHECK(dq.n_c == 1e5);
    CHECK(dq.coop == doctest::Approx(dq.c0 * 1e5));
}

TEST_CASE("imprecision occupation")
{
    DerivedQuantities dq;
    dq.eta_total = 0.25;
    dq.coop = 520.8 / 0.25;
    CHECK(imprecision_occupation(dq) == doctest::Approx(1.2e-4).epsilon(0.01));
    dq.coop = (1.0 / 16) / 0.25;
    CHECK(imprecision_occupation(dq) == doctest::Approx(1.0));
    dq.coop = 1.0;
    CHECK(imprecision_occupation(dq) == doctest::Approx(0.25));
    dq.eta_total = 0;
    CHECK_THROWS_AS(imprecision_occupation(dq), NoMeasurementError);
}

TEST_CASE("derive is bitwise deterministic")
{
    const auto d = fixtures::room_temperature_device();
    const auto v = fixtures::room_temperature_drive(9e-6);
    const auto a = derive(d, v), b = derive(d, v);
    CHECK(std::memcmp(&a, &b, sizeof(a)) == 0);
}

TEST_CASE("non-physical inputs are rejected with the parameter name")
{
    const auto good = fixtures::room_temperature_device();
    const auto drive = fixtures::room_temperature_drive(1e-6);

    auto d = good;
    d.eta_c = 1.3;
    CHECK_THROWS_WITH_AS(derive(d, drive), doctest::Contains("eta_c"), ValidationError);
    d = good;
    d.mass_eff = -1;
    CHECK_THROWS_WITH_AS(derive(d, drive), doctest::Contains("mass_eff"), ValidationError);
    d = good;
    d.gamma_m = d.omega_m * 2; // overdamped
    CHECK_THROWS_AS(derive(d, drive), ValidationError);

    auto v = drive;
    v.eta_path = -0.1;
    CHECK_THROWS_WITH_AS(derive(good, v), doctest::Contains("eta_path"), ValidationError);
    v = drive;
    v.gamma_eff = good.gamma_m / 2;
    CHECK_THROWS_WITH_AS(derive(good, v), doctest::Contains("gamma_eff"), ValidationError);
    v = drive;
    v.power_in = -1;
    CHECK_THROWS_AS(derive(good, v), ValidationError);
    v = drive;
    v.c_qq = -1e-3;
    CHECK_THROWS_AS(derive(good, v), ValidationError);
}

TEST_CASE("feedback damping defaults to the intrinsic linewidth")
{
    const auto d = fixtures::room_temperature_device();
    auto v = fixtures::room_temperature_drive(1e-6, false);
    CHECK(derive(d, v).gamma_eff == d.gamma_m);
    v.gamma_eff = two_pi * 1e3;
    CHECK(derive(d, v).gamma_eff == doctest::Approx(two_pi * 1e3));
}
