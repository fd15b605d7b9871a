#include "optocorr/response.hpp"

#include "optocorr/error.hpp"
#include "optocorr/params.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace optocorr {

LossAngle constant_loss(double phi)
{
    return [phi](double) { return phi; };
}

Susceptibility::Susceptibility(DampingModel m, double mass, double om, double g, LossAngle phi)
    : model_(m), mass_(mass), omega_m_(om), gamma_(g), phi_(std::move(phi))
{
    if (!(mass > 0) || !(om > 0) || !(g > 0))
        throw ValidationError("susceptibility", "mass, omega_m and gamma must be > 0");
}

Susceptibility Susceptibility::viscous(double mass, double omega_m, double gamma)
{
    return Susceptibility(DampingModel::Viscous, mass, omega_m, gamma, {});
}

Susceptibility Susceptibility::structural(double mass, double omega_m, double gamma, LossAngle phi)
{
    return Susceptibility(DampingModel::Structural, mass, omega_m, gamma, std::move(phi));
}

Susceptibility Susceptibility::for_device(const DeviceParams& d, const DriveParams& drive,
                                          DampingModel model, LossAngle phi)
{
    const double g = drive.effective_damping(d);
    if (model == DampingModel::Viscous)
        return viscous(d.mass_eff, d.omega_m, g);
    if (!phi)
        phi = constant_loss(1.0 / d.quality_factor());
    return structural(d.mass_eff, d.omega_m, g, std::move(phi));
}

double Susceptibility::loss_angle(double omega) const
{
    if (model_ != DampingModel::Structural || !phi_)
        return 0.0;
    return phi_(omega);
}

std::complex<double> Susceptibility::operator()(double omega) const
{
    const double re = omega_m_ * omega_m_ - omega * omega;
    double im = omega * gamma_;
    if (model_ == DampingModel::Structural && phi_)
        im += omega_m_ * omega_m_ * phi_(omega);
    return 1.0 / (mass_ * std::complex<double>(re, -im));
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          std::initializer_list<double> breaks, const QuadratureOptions& opt)
{
    if (!(b > a))
        return 0.0;
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b)
            pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    using boost::math::quadrature::gauss_kronrod;
    double total = 0, err_total = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i])
            continue;
        double err = 0;
        total += gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], opt.max_depth,
                                                      opt.rel_tol, &err);
        err_total += err;
    }
    const double scale = std::max(std::abs(total), 1e-300);
    if (!std::isfinite(total) || err_total > opt.accept_tol * scale)
        throw IntegrationError("adaptive quadrature did not converge within the node budget "
                               "(estimated relative error " + std::to_string(err_total / scale) + ")");
    return total;
}

double lorentzian_band_integral(const Susceptibility& s, double center, double halfwidth,
                                const QuadratureOptions& opt)
{
    if (halfwidth < 0)
        throw BandError("halfwidth must be >= 0");
    if (halfwidth == 0)
        return 0.0;
    const double lo = std::max(0.0, center - halfwidth);
    const double hi = center + halfwidth;
    const double om = s.omega_m(), g = s.gamma();
    auto f = [&s](double w) { return std::norm(s(w)); };
    // break points around the peak keep the first Kronrod pass from missing it
    return integrate_adaptive(f, lo, hi, {om - 10 * g, om - g, om, om + g, om + 10 * g}, opt);
}

} // namespace optocorr
