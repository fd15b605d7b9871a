#pragma once

#include <complex>
#include <functional>

namespace optocorr {

struct DeviceParams;
struct DriveParams;

enum class DampingModel { Viscous, Structural };

/// Loss angle phi(Omega), dimensionless.
using LossAngle = std::function<double(double)>;

LossAngle constant_loss(double phi);

// Mechanical response of a single mode.
//   viscous:    1 / (m (Om^2 - W^2 - i W G))
//   structural: 1 / (m ((Om^2 - W^2) - i (W G + Om^2 phi(W))))
// An empty loss angle in the structural model behaves like phi = 0.
class Susceptibility {
public:
    static Susceptibility viscous(double mass, double omega_m, double gamma);
    static Susceptibility structural(double mass, double omega_m, double gamma, LossAngle phi);

    // gamma_eff in the denominator; structural loss defaults to 1/Q with Q = omega_m/gamma_m
    static Susceptibility for_device(const DeviceParams& d, const DriveParams& drive,
                                     DampingModel model = DampingModel::Viscous,
                                     LossAngle phi = {});

    std::complex<double> operator()(double omega) const;

    DampingModel model() const { return model_; }
    double mass() const { return mass_; }
    double omega_m() const { return omega_m_; }
    double gamma() const { return gamma_; }
    double loss_angle(double omega) const;

private:
    Susceptibility(DampingModel m, double mass, double om, double g, LossAngle phi);

    DampingModel model_;
    double mass_;
    double omega_m_;
    double gamma_;
    LossAngle phi_;
};

inline std::complex<double> chi(const Susceptibility& s, double omega) { return s(omega); }

struct QuadratureOptions {
    double rel_tol = 1e-9;     // refinement target
    double accept_tol = 1e-6;  // estimated error above this throws
    unsigned max_depth = 18;   // bisection levels per sub-interval (node budget)
};

/// Integral of |chi|^2 over [center - halfwidth, center + halfwidth], in m^2/N^2 * rad/s.
double lorentzian_band_integral(const Susceptibility& s, double center, double halfwidth,
                                const QuadratureOptions& opt = {});

/// Adaptive Gauss-Kronrod integral of f over [a, b], splitting at interior break points.
/// Throws IntegrationError when the error estimate exceeds opt.accept_tol * |I|.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          std::initializer_list<double> breaks = {},
                          const QuadratureOptions& opt = {});

} // namespace optocorr
