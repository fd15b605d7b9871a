#include <optocorr/asymmetry.hpp>
#include <optocorr/config.hpp>
#include <optocorr/constants.hpp>
#include <optocorr/metrology.hpp>
#include <optocorr/spectra.hpp>
#include <optocorr/stochastic.hpp>
#include <optocorr/welch.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace optocorr;
using constants::two_pi;

namespace {

// room-temperature nanobeam with feedback damping
struct RoomTemperature {
    DeviceParams d;
    DriveParams v;
    RoomTemperature()
    {
        d.omega_m = two_pi * 3.4e6;
        d.gamma_m = two_pi * 12.0;
        d.mass_eff = 1.94e-15;
        d.kappa = two_pi * 4.5e9;
        d.eta_c = 0.5;
        d.g0 = two_pi * 60e3;
        d.wavelength = 780e-9;
        d.temperature = 300.0;
        v.power_in = 25e-6;
        v.eta_path = 0.5;
        v.gamma_eff = two_pi * 1e3;
    }
    DerivedQuantities dq() const { return derive(d, v); }
    Susceptibility chi() const { return Susceptibility::for_device(d, v); }
};

void BM_homodyne_grid(benchmark::State& st)
{
    const RoomTemperature p;
    const auto dq = p.dq();
    const auto s = p.chi();
    const auto grid = linear_grid(two_pi * 3.3e6, two_pi * 3.5e6, std::size_t(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(homodyne_spectrum(dq, s, 0.3, grid));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_homodyne_grid)->Arg(4001)->Arg(1 << 16);

void BM_closed_curve(benchmark::State& st)
{
    const RoomTemperature p;
    const auto dq = p.dq();
    const auto th = theta_grid(1801);
    for (auto _ : st)
        benchmark::DoNotOptimize(closed_curve(dq, default_band(), th));
}
BENCHMARK(BM_closed_curve);

void BM_model_curve(benchmark::State& st)
{
    const RoomTemperature p;
    const auto dq = p.dq();
    const auto s = p.chi();
    const auto th = theta_grid(std::size_t(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(model_curve(dq, s, default_band(), th, true));
}
BENCHMARK(BM_model_curve)->Arg(181)->Unit(benchmark::kMillisecond);

void BM_theta_opt_budget(benchmark::State& st)
{
    const RoomTemperature p;
    const auto dq = p.dq();
    const auto s = p.chi();
    const auto grid = linear_grid(two_pi * 3.3e6, two_pi * 3.5e6, 4001);
    for (auto _ : st)
        benchmark::DoNotOptimize(force_budget_opt(dq, s, grid));
}
BENCHMARK(BM_theta_opt_budget)->Unit(benchmark::kMicrosecond);

void BM_welch_segment(benchmark::State& st)
{
    const auto n = std::size_t(st.range(0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> q(n), pch(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = g(rng);
        pch[i] = g(rng);
    }
    WelchAccumulator acc(n, 1e-6, Window::Hann);
    for (auto _ : st)
        acc.add_segment(q.data(), pch.data());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_welch_segment)->Arg(1 << 14)->Arg(1 << 18);

void BM_simulate(benchmark::State& st)
{
    DeviceParams d;
    d.omega_m = two_pi * 50e3;
    d.gamma_m = d.omega_m / 500.0;
    d.mass_eff = 1e-12;
    d.kappa = two_pi * 50e6;
    d.eta_c = 0.5;
    d.g0 = two_pi * 1e3;
    d.wavelength = 1550e-9;
    d.temperature = 1000.0 * constants::hbar * d.omega_m / constants::k_B;
    DriveParams v;
    v.eta_path = 0.5;
    v.n_c_override = 100.0 / (4.0 * d.g0 * d.g0 / (d.kappa * d.gamma_m));
    SimConfig c;
    c.dt = 0.04 / d.omega_m;
    c.n_segments = 8;
    c.duration = double(9 * (1 << 15)) * c.dt;
    for (auto _ : st)
        benchmark::DoNotOptimize(simulate_spectra(d, v, c, false, 1));
    st.SetItemsProcessed(st.iterations() * std::int64_t(c.samples()));
}
BENCHMARK(BM_simulate)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
