#include "optocorr/welch.hpp"

#include "optocorr/constants.hpp"
#include "optocorr/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

namespace optocorr {

namespace {
// planning is not thread-safe in FFTW; execution on distinct arrays is
std::mutex g_plan_mutex;
} // namespace

const char* to_string(Window w)
{
    return w == Window::Hann ? "hann" : "rect";
}

Window window_from_string(const std::string& s)
{
    if (s == "hann" || s == "Hann" || s == "hanning")
        return Window::Hann;
    if (s == "rect" || s == "Rect" || s == "boxcar" || s == "none")
        return Window::Rect;
    throw ValidationError("window", "unknown window '" + s + "' (hann|rect)");
}

std::vector<double> window_coefficients(Window w, std::size_t n)
{
    std::vector<double> c(n, 1.0);
    if (w == Window::Hann)
        for (std::size_t k = 0; k < n; ++k)
            c[k] = 0.5 - 0.5 * std::cos(constants::two_pi * double(k) / double(n));
    return c;
}

double welch_effective_averages(Window w, std::size_t n, std::size_t k)
{
    if (k == 0)
        return 0.0;
    const auto c = window_coefficients(w, n);
    double norm = 0;
    for (double v : c)
        norm += v * v;
    const std::size_t hop = n / 2;
    double denom = 1.0;
    for (std::size_t j = 1; j < k && j * hop < n; ++j) {
        double r = 0;
        for (std::size_t i = 0; i + j * hop < n; ++i)
            r += c[i] * c[i + j * hop];
        r /= norm;
        denom += 2.0 * (1.0 - double(j) / double(k)) * r * r;
    }
    return double(k) / denom;
}

std::size_t welch_segment_length(std::size_t n_samples, std::size_t n_segments)
{
    if (n_segments == 0)
        throw InsufficientDataError("need at least one segment");
    std::size_t l = 2 * n_samples / (n_segments + 1);
    l &= ~std::size_t(1);
    return l;
}

struct WelchAccumulator::Plan {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
    explicit Plan(std::size_t n)
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        in = fftw_alloc_real(n);
        out = fftw_alloc_complex(n / 2 + 1);
        plan = fftw_plan_dft_r2c_1d(int(n), in, out, FFTW_ESTIMATE);
    }
    ~Plan()
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
};

WelchAccumulator::WelchAccumulator(std::size_t segment_length, double dt, Window w)
    : n_(segment_length), dt_(dt), window_(w)
{
    if (n_ < 16 || n_ % 2)
        throw InsufficientDataError("segment length must be even and >= 16");
    if (!(dt > 0))
        throw ValidationError("dt", "must be > 0");
    win_ = window_coefficients(w, n_);
    double s2 = 0;
    for (double v : win_)
        s2 += v * v;
    scale_ = dt_ / s2;
    sqq_.assign(n_ / 2 + 1, 0.0);
    spp_.assign(n_ / 2 + 1, 0.0);
    sqp_.assign(n_ / 2 + 1, 0.0);
    plan_ = std::make_unique<Plan>(n_);
}

WelchAccumulator::~WelchAccumulator() = default;
WelchAccumulator::WelchAccumulator(WelchAccumulator&&) noexcept = default;
WelchAccumulator& WelchAccumulator::operator=(WelchAccumulator&&) noexcept = default;

WelchAccumulator::WelchAccumulator(const WelchAccumulator& o)
    : n_(o.n_), dt_(o.dt_), window_(o.window_), win_(o.win_), scale_(o.scale_), sqq_(o.sqq_),
      spp_(o.spp_), sqp_(o.sqp_), count_(o.count_), run_lengths_(o.run_lengths_),
      plan_(std::make_unique<Plan>(o.n_))
{
}

WelchAccumulator& WelchAccumulator::operator=(const WelchAccumulator& o)
{
    if (this != &o) {
        WelchAccumulator tmp(o);
        *this = std::move(tmp);
    }
    return *this;
}

void WelchAccumulator::begin_run()
{
    run_lengths_.push_back(0);
}

void WelchAccumulator::add_segment(const double* q, const double* p)
{
    const std::size_t nb = n_ / 2 + 1;
    thread_local std::vector<double> re, im;
    re.resize(nb);
    im.resize(nb);

    for (std::size_t i = 0; i < n_; ++i)
        plan_->in[i] = q[i] * win_[i];
    fftw_execute(plan_->plan);
    for (std::size_t k = 0; k < nb; ++k) {
        re[k] = plan_->out[k][0];
        im[k] = plan_->out[k][1];
        sqq_[k] += re[k] * re[k] + im[k] * im[k];
    }
    if (p) {
        for (std::size_t i = 0; i < n_; ++i)
            plan_->in[i] = p[i] * win_[i];
        fftw_execute(plan_->plan);
        for (std::size_t k = 0; k < nb; ++k) {
            const double pr = plan_->out[k][0], pi = plan_->out[k][1];
            spp_[k] += pr * pr + pi * pi;
            sqp_[k] += re[k] * pr + im[k] * pi;
        }
    }
    if (run_lengths_.empty())
        run_lengths_.push_back(0);
    ++run_lengths_.back();
    ++count_;
}

void WelchAccumulator::merge(const WelchAccumulator& o)
{
    if (o.n_ != n_ || o.dt_ != dt_ || o.window_ != window_)
        throw GridMismatchError("cannot merge periodograms with different segment layout");
    for (std::size_t k = 0; k < sqq_.size(); ++k) {
        sqq_[k] += o.sqq_[k];
        spp_[k] += o.spp_[k];
        sqp_[k] += o.sqp_[k];
    }
    count_ += o.count_;
    run_lengths_.insert(run_lengths_.end(), o.run_lengths_.begin(), o.run_lengths_.end());
}

double WelchAccumulator::effective_averages() const
{
    double acc = 0;
    for (std::size_t k : run_lengths_)
        acc += welch_effective_averages(window_, n_, k);
    return acc;
}

std::vector<double> WelchAccumulator::grid() const
{
    std::vector<double> g(n_ / 2 + 1);
    const double df = constants::two_pi / (double(n_) * dt_);
    for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = df * double(k);
    return g;
}

Spectrum WelchAccumulator::make(const std::vector<double>& acc, bool is_signed) const
{
    if (count_ == 0)
        throw InsufficientDataError("no segments accumulated");
    Spectrum s;
    s.grid = grid();
    s.values.resize(acc.size());
    const double f = scale_ / double(count_);
    for (std::size_t k = 0; k < acc.size(); ++k)
        s.values[k] = acc[k] * f;
    s.signed_values = is_signed;
    s.averages = effective_averages();
    s.rbw = constants::two_pi / (double(n_) * dt_);
    return s;
}

Spectrum WelchAccumulator::qq() const { return make(sqq_, false); }
Spectrum WelchAccumulator::pp() const { return make(spp_, false); }
Spectrum WelchAccumulator::qp() const { return make(sqp_, true); }

Spectrum WelchAccumulator::combined(double theta) const
{
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<double> acc(sqq_.size());
    for (std::size_t k = 0; k < acc.size(); ++k)
        acc[k] = c * c * sqq_[k] + s * s * spp_[k] + 2.0 * s * c * sqp_[k];
    // rounding can push a zero-signal bin a hair below zero
    for (double& v : acc)
        v = std::max(v, 0.0);
    Spectrum out = make(acc, false);
    out.theta = theta;
    return out;
}

Spectrum welch_psd(std::span<const double> trace, double dt, std::size_t n_segments, Window w)
{
    if (n_segments == 0)
        throw InsufficientDataError("need at least one segment");
    const std::size_t len = welch_segment_length(trace.size(), n_segments);
    if (len < 16)
        throw InsufficientDataError("trace of " + std::to_string(trace.size()) + " samples is too short for "
                                    + std::to_string(n_segments) + " segments");
    WelchAccumulator acc(len, dt, w);
    acc.begin_run();
    const std::size_t hop = len / 2;
    for (std::size_t j = 0; j < n_segments; ++j)
        acc.add_segment(trace.data() + j * hop, nullptr);
    return acc.qq();
}

CompareBand resonance_band(double omega_m, double halfwidth, double bin_width, std::size_t exclude_bins)
{
    if (!(halfwidth > 0) || !(bin_width > 0))
        throw ValidationError("compare_halfwidth", "band and bin widths must be > 0");
    CompareBand b{omega_m - halfwidth, omega_m + halfwidth, {}};
    if (exclude_bins > 0) {
        const double c = std::round(omega_m / bin_width) * bin_width;
        const double h = (double(exclude_bins) + 0.5) * bin_width;
        b.exclude.emplace_back(c - h, c + h);
    }
    return b;
}

OracleComparison oracle_compare(const Spectrum& analytic, const Spectrum& empirical, const CompareBand& band)
{
    if (analytic.size() != empirical.size())
        throw GridMismatchError("spectra have different lengths");
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic.grid[i], b = empirical.grid[i];
        if (std::abs(a - b) > 1e-9 * std::max({std::abs(a), std::abs(b), 1.0}))
            throw GridMismatchError("frequency grids differ at bin " + std::to_string(i));
    }
    const double nu = empirical.averages > 0 ? empirical.averages : 1.0;
    OracleComparison r;
    r.expected_rms = 1.0 / std::sqrt(nu);
    double ss = 0, zs = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double w = analytic.grid[i];
        if (w < band.lo || w > band.hi)
            continue;
        bool skip = false;
        for (const auto& [lo, hi] : band.exclude)
            if (w >= lo && w <= hi)
                skip = true;
        if (skip)
            continue;
        const double a = analytic.values[i];
        if (!(a != 0))
            continue;
        const double rel = empirical.values[i] / a - 1.0;
        const double z = rel * std::sqrt(nu);
        ss += rel * rel;
        zs += z;
        r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
        r.grid.push_back(w);
        r.z.push_back(z);
    }
    r.bins = r.z.size();
    if (r.bins == 0)
        throw BandError("comparison band contains no bins");
    r.rel_rms = std::sqrt(ss / double(r.bins));
    r.mean_z = zs / double(r.bins);
    return r;
}

} // namespace optocorr
