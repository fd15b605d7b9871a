#include "optocorr/stochastic.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"
#include "optocorr/response.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstring>
#include <optional>
#include <thread>

namespace optocorr {

std::size_t SimConfig::samples() const
{
    return dt > 0 ? std::size_t(std::llround(duration / dt)) : 0;
}

void SimConfig::validate(const DeviceParams& device) const
{
    if (!(dt > 0) || !std::isfinite(dt))
        throw ValidationError("dt", "must be > 0");
    if (dt * device.omega_m >= 0.05)
        throw StabilityError("step too coarse: dt*omega_m = " + std::to_string(dt * device.omega_m)
                             + " (need < 0.05)");
    if (samples() < (std::size_t(1) << 16))
        throw ValidationError("duration", "need at least 2^16 samples per trajectory (got "
                                              + std::to_string(samples()) + ")");
    if (n_segments < 8)
        throw ValidationError("segments", "need at least 8 Welch segments");
    if (n_trajectories < 1)
        throw ValidationError("trajectories", "need at least one trajectory");
    if (welch_segment_length(samples(), n_segments) < 16)
        throw ValidationError("segments", "segments too short for the trajectory length");
    for (double t : theta_list)
        if (!std::isfinite(t))
            throw ValidationError("thetas", "non-finite homodyne angle");
    for (const auto& t : injected_tones)
        t.validate();
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index)
{
    auto splitmix = [](std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t s = seed;
    std::uint64_t t = splitmix(s) ^ (index * 0xd1b54a32d192ed03ULL);
    return splitmix(t);
}

namespace {

// Exact discretization of the oscillator in scaled time tau = omega_m t.
// State (z, w = dz/dtau, Y = int z dtau over the step, W = back-action Wiener
// increment over the step). Y and W restart from zero at every step.
class Stepper {
public:
    Stepper(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg, std::uint64_t index)
        : gen_(stream_seed(cfg.seed, index)), dt_(cfg.dt)
    {
        const auto dq = derive(device, drive);
        const double om = device.omega_m;
        const double h = om * cfg.dt;
        const double ge = dq.gamma_eff / om;
        const double gm = dq.gamma_m / om;
        const double eta_c = device.eta_c;
        const double eta_p = drive.eta_path;

        // optical input decomposition over (xi_in, xi_0)
        const double s_in = std::sqrt(0.5 + drive.c_qq);
        const double a0 = std::sqrt(eta_c) * s_in, a1 = std::sqrt((1.0 - eta_c) / 2.0);
        const double an = std::hypot(a0, a1);
        const double b0 = (1.0 - 2.0 * eta_c) * s_in, b1 = -std::sqrt(2.0 * eta_c * (1.0 - eta_c));
        const double bdot = (b0 * a0 + b1 * a1) / an;
        const double bperp2 = std::max(0.0, b0 * b0 + b1 * b1 - bdot * bdot);

        const double sig_th = 2.0 * std::sqrt(gm * (dq.n_th + 0.5));
        const double sig_ba = 2.0 * std::sqrt(2.0 * dq.coop * gm) * an;

        Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
        A(0, 1) = 1.0;
        A(1, 0) = -1.0;
        A(1, 1) = -ge;
        A(2, 0) = 1.0;
        Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
        B(1, 0) = sig_th;
        B(1, 1) = sig_ba;
        B(3, 1) = 1.0;

        // Van Loan: exp([[-A, B B^T], [0, A^T]] h)
        Eigen::Matrix<double, 8, 8> M = Eigen::Matrix<double, 8, 8>::Zero();
        M.topLeftCorner<4, 4>() = -A * h;
        M.topRightCorner<4, 4>() = B * B.transpose() * h;
        M.bottomRightCorner<4, 4>() = A.transpose() * h;
        const Eigen::Matrix<double, 8, 8> E = M.exp();
        const Eigen::Matrix4d Phi = E.bottomRightCorner<4, 4>().transpose();
        Eigen::Matrix4d Q = Phi * E.topRightCorner<4, 4>();
        Q = 0.5 * (Q + Q.transpose());

        // square root via eigendecomposition: Q is close to singular for small h
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(Q);
        const Eigen::Vector4d d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        const Eigen::Matrix4d L = es.eigenvectors() * d.asDiagonal();

        for (int i = 0; i < 4; ++i) {
            phi_[i][0] = Phi(i, 0);
            phi_[i][1] = Phi(i, 1);
            for (int j = 0; j < 4; ++j)
                l_[i][j] = L(i, j);
        }

        const double sdt = std::sqrt(cfg.dt);
        kq_ = std::sqrt(2.0 * eta_p) * bdot / (std::sqrt(om) * cfg.dt);
        nq_ = std::sqrt(1.0 - eta_p + 2.0 * eta_p * bperp2) / sdt;
        kp_ = -std::sqrt(2.0 * eta_p) * std::sqrt(2.0 * eta_c * dq.coop * dq.gamma_m) / cfg.dt;
        np_ = std::sqrt(eta_p * (1.0 + 2.0 * (1.0 - 2.0 * eta_c) * (1.0 - 2.0 * eta_c) * drive.c_pp) + 1.0 - eta_p)
              / sdt;
        inv_om_ = 1.0 / om;

        // stationary start
        const double v = (sig_th * sig_th + sig_ba * sig_ba) / (2.0 * ge);
        z_ = std::sqrt(v) * normal();
        w_ = std::sqrt(v) * normal();

        // coherent tones: z_tone(t) = Re[A e^{i W t}] with A = conj(chi) F0 / x_zp
        const auto chi = Susceptibility::viscous(device.mass_eff, om, dq.gamma_eff);
        for (const auto& t : cfg.injected_tones) {
            Tone tone;
            tone.omega = t.freq;
            tone.amp = std::conj(chi(t.freq)) * std::sqrt(2.0 * t.power) / dq.x_zp;
            tone.step = std::polar(1.0, t.freq * cfg.dt);
            tone.phase = 1.0;
            tones_.push_back(tone);
        }
    }

    // advance one dt; returns interval-averaged photocurrents and the end-point z
    void step(double& iq, double& ip, double& z)
    {
        double e[4];
        for (double& x : e)
            x = normal();
        const double z0 = z_, w0 = w_;
        double x[4];
        for (int i = 0; i < 4; ++i)
            x[i] = phi_[i][0] * z0 + phi_[i][1] * w0 + l_[i][0] * e[0] + l_[i][1] * e[1] + l_[i][2] * e[2]
                   + l_[i][3] * e[3];
        z_ = x[0];
        w_ = x[1];

        double y_t = x[2] * inv_om_; // int z dt
        double z_tone = 0;
        if (!tones_.empty()) {
            ++k_;
            const bool resync = (k_ & 4095) == 0;
            for (auto& t : tones_) {
                const std::complex<double> next = resync ? std::polar(1.0, t.omega * dt_ * double(k_)) : t.phase * t.step;
                y_t += (t.amp * (next - t.phase) / std::complex<double>(0.0, t.omega)).real();
                t.phase = next;
                z_tone += (t.amp * next).real();
            }
        }

        iq = kq_ * x[3] + nq_ * normal();
        ip = kp_ * y_t + np_ * normal();
        z = z_ + z_tone;
    }

private:
    struct Tone {
        double omega;
        std::complex<double> amp, step, phase;
    };

    double normal() { return nd_(gen_); }

    boost::random::mt19937_64 gen_;
    boost::random::normal_distribution<double> nd_;
    double dt_;
    double phi_[4][2];
    double l_[4][4];
    double kq_, nq_, kp_, np_, inv_om_;
    double z_ = 0, w_ = 0;
    std::vector<Tone> tones_;
    std::uint64_t k_ = 0;
};

void check_regime(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg)
{
    device.validate();
    drive.validate(device);
    cfg.validate(device);
    if (drive.detuning != 0)
        throw ValidationError("detuning", "the time-domain oracle implements zero detuning only");
    if (device.kappa / device.omega_m < 20)
        warn("kappa/omega_m < 20: adiabatic elimination of the cavity is questionable");
}

WelchAccumulator run_trajectory(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg,
                                std::uint64_t index)
{
    Stepper st(device, drive, cfg, index);
    const std::size_t len = welch_segment_length(cfg.samples(), cfg.n_segments);
    const std::size_t hop = len / 2;
    WelchAccumulator acc(len, cfg.dt, cfg.window);
    acc.begin_run();
    std::vector<double> q(len), p(len);
    double z;
    for (std::size_t i = 0; i < len; ++i)
        st.step(q[i], p[i], z);
    acc.add_segment(q.data(), p.data());
    for (std::size_t s = 1; s < cfg.n_segments; ++s) {
        std::memmove(q.data(), q.data() + hop, hop * sizeof(double));
        std::memmove(p.data(), p.data() + hop, hop * sizeof(double));
        for (std::size_t i = hop; i < len; ++i)
            st.step(q[i], p[i], z);
        acc.add_segment(q.data(), p.data());
    }
    return acc;
}

} // namespace

QuadratureTraces simulate(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg)
{
    check_regime(device, drive, cfg);
    Stepper st(device, drive, cfg, 0);
    const std::size_t n = cfg.samples();
    QuadratureTraces tr;
    tr.t.resize(n);
    tr.z.resize(n);
    tr.i_q.resize(n);
    tr.i_p.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        tr.t[k] = double(k) * cfg.dt;
        st.step(tr.i_q[k], tr.i_p[k], tr.z[k]);
    }
    tr.thetas = cfg.theta_list;
    for (double th : cfg.theta_list) {
        const double c = std::cos(th), s = std::sin(th);
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k)
            v[k] = c * tr.i_q[k] + s * tr.i_p[k];
        tr.i_theta.push_back(std::move(v));
    }
    return tr;
}

SimulatedSpectra simulate_spectra(const DeviceParams& device, const DriveParams& drive, const SimConfig& cfg,
                                  bool keep_trajectories, unsigned threads)
{
    check_regime(device, drive, cfg);
    const std::size_t n = cfg.n_trajectories;
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, n));

    std::vector<std::optional<WelchAccumulator>> parts(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto worker = [&](unsigned id) {
        try {
            for (std::size_t i = next++; i < n; i = next++)
                parts[i].emplace(run_trajectory(device, drive, cfg, i));
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker, t);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    // fixed-order reduction keeps results independent of scheduling
    SimulatedSpectra out{std::move(*parts[0]), {}, {}};
    if (keep_trajectories)
        out.trajectories.push_back(out.total);
    for (std::size_t i = 1; i < n; ++i) {
        out.total.merge(*parts[i]);
        if (keep_trajectories)
            out.trajectories.push_back(std::move(*parts[i]));
    }
    for (double th : cfg.theta_list)
        out.theta_spectra.push_back(out.total.combined(th));
    return out;
}

} // namespace optocorr
