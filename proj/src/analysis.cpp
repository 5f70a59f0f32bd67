#include "qwalk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk
{
namespace
{
//! Neumaier-compensated running sum.
class CompensatedSum
{
  public:
    void add(double x)
    {
        double const t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_{0};
    double comp_{0};
};

long rel(std::size_t i, std::size_t origin)
{
    return static_cast<long>(i) - static_cast<long>(origin);
}

void require_origin(std::span<double const> d, std::size_t origin)
{
    if (origin >= d.size())
    {
        throw Error(ErrorCode::range,
                    fmt::format("origin {} outside density of {} sites",
                                origin,
                                d.size()));
    }
}

double sum_squares(std::span<double const> v)
{
    double s = 0;
    for (double x : v)
        s += x * x;
    return s;
}
}  // namespace

//---------------------------------------------------------------------------//
void TimeSeries::validate() const
{
    if (times.size() != values.size())
    {
        throw Error(ErrorCode::shape_mismatch,
                    fmt::format("series '{}' has {} times but {} values",
                                label,
                                times.size(),
                                values.size()));
    }
    for (std::size_t i = 1; i < times.size(); ++i)
    {
        if (times[i] <= times[i - 1])
        {
            throw Error(ErrorCode::domain,
                        fmt::format("series '{}' times not increasing at {}",
                                    label,
                                    i));
        }
    }
}

TimeSeries TimeSeries::slice(long lo, long hi) const
{
    TimeSeries out{label, {}, {}};
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (times[i] >= lo && times[i] <= hi)
        {
            out.times.push_back(times[i]);
            out.values.push_back(values[i]);
        }
    }
    return out;
}

double LaplaceFit::operator()(double x) const
{
    return amplitude / (2 * scale) * std::exp(-std::abs(x - center) / scale);
}

//---------------------------------------------------------------------------//
double cog_half(std::span<double const> density, std::size_t origin)
{
    require_origin(density, origin);
    double mass = 0;
    double first = 0;
    for (std::size_t i = origin; i < density.size(); ++i)
    {
        mass += density[i];
        first += static_cast<double>(rel(i, origin)) * density[i];
    }
    if (!(mass > 0))
    {
        throw Error(ErrorCode::undefined_cog,
                    "half-side mass is zero; COG is undefined");
    }
    return first / mass;
}

double cog_half(WalkState const& state)
{
    auto d = density(state);
    return cog_half(d, state.origin());
}

double std_dev(std::span<double const> density, std::size_t origin)
{
    require_origin(density, origin);
    double first = 0;
    double second = 0;
    for (std::size_t i = 0; i < density.size(); ++i)
    {
        double const n = static_cast<double>(rel(i, origin));
        first += n * density[i];
        second += n * n * density[i];
    }
    return std::sqrt(std::max(0.0, second - first * first));
}

double window_density(std::span<double const> density,
                      std::size_t origin,
                      long half_width)
{
    require_origin(density, origin);
    long const lo = static_cast<long>(origin) - half_width;
    long const hi = static_cast<long>(origin) + half_width;
    if (half_width < 0 || lo < 0 || hi >= static_cast<long>(density.size()))
    {
        throw Error(ErrorCode::range,
                    fmt::format("window [-{0}, {0}] exceeds the lattice",
                                half_width));
    }
    double total = 0;
    for (long i = lo; i <= hi; ++i)
        total += density[static_cast<std::size_t>(i)];
    return total;
}

double correlation_eta(WalkState const& state)
{
    auto p = state.plus();
    auto m = state.minus();
    double eta = 0;
    for (std::size_t i = state.origin(); i < state.size(); ++i)
        eta += (p[i] * std::conj(m[i])).real();
    return eta;
}

//---------------------------------------------------------------------------//
double DensityMoments::cog() const
{
    if (!(half_mass > 0))
    {
        throw Error(ErrorCode::undefined_cog,
                    "half-side mass is zero; COG is undefined");
    }
    return half_first / half_mass;
}

double DensityMoments::sd() const
{
    double const mean = first / mass;
    return std::sqrt(std::max(0.0, second / mass - mean * mean));
}

DensityMoments& DensityMoments::operator+=(DensityMoments const& o)
{
    half_mass += o.half_mass;
    half_first += o.half_first;
    mass += o.mass;
    first += o.first;
    second += o.second;
    window_mass += o.window_mass;
    return *this;
}

DensityMoments density_moments(WalkState const& state, long window_half_width)
{
    auto p = state.plus();
    auto m = state.minus();
    std::size_t const origin = state.origin();
    DensityMoments mom;
    for (std::size_t i = 0; i < state.size(); ++i)
    {
        double const d = std::norm(p[i]) + std::norm(m[i]);
        if (d == 0)
            continue;
        long const pos = rel(i, origin);
        double const n = static_cast<double>(pos);
        mom.mass += d;
        mom.first += n * d;
        mom.second += n * n * d;
        if (pos >= 0)
        {
            mom.half_mass += d;
            mom.half_first += n * d;
        }
        if (std::abs(pos) <= window_half_width)
            mom.window_mass += d;
    }
    return mom;
}

//---------------------------------------------------------------------------//
TimeSeries cog_exponent_series(TimeSeries const& cog, int half_window)
{
    cog.validate();
    if (cog.size() < 3)
    {
        throw Error(ErrorCode::domain,
                    "COG exponent needs at least three samples");
    }
    if (half_window < 1)
    {
        throw Error(ErrorCode::domain, "half_window must be at least 1");
    }
    std::size_t const n = cog.size();
    std::vector<double> lt(n), lc(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(cog.values[i] > 0) || cog.times[i] <= 0)
        {
            throw Error(ErrorCode::domain,
                        fmt::format("COG exponent needs positive t and COG; "
                                    "got COG({}) = {}",
                                    cog.times[i],
                                    cog.values[i]));
        }
        lt[i] = std::log(static_cast<double>(cog.times[i]));
        lc[i] = std::log(cog.values[i]);
    }
    TimeSeries out{"alpha", cog.times, std::vector<double>(n)};
    auto const w = static_cast<std::size_t>(half_window);
    for (std::size_t i = 0; i < n; ++i)
    {
        std::size_t const lo = i >= w ? i - w : 0;
        std::size_t const hi = std::min(n - 1, i + w);
        out.values[i] = (lc[hi] - lc[lo]) / (lt[hi] - lt[lo]);
    }
    return out;
}

AlphaFit fit_alpha_model(TimeSeries const& alpha)
{
    alpha.validate();
    if (alpha.size() == 0)
    {
        throw Error(ErrorCode::domain, "cannot fit an empty alpha series");
    }
    std::size_t const n = alpha.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = static_cast<double>(alpha.times[i]);

    auto objective = [&](double kappa) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double const r = alpha.values[i] - 1.0 / (kappa * t[i] + 1.0);
            s += r * r;
        }
        return s;
    };

    AlphaFit fit;
    double mean = 0;
    for (double v : alpha.values)
        mean += v;
    mean /= static_cast<double>(n);
    fit.constant_alpha = mean;
    for (double v : alpha.values)
        fit.constant_residual += (v - mean) * (v - mean);

    // Coarse log-spaced scan over kappa t_max in [1e-8, 1e6], then Brent
    // between the neighbours of the best grid point.
    double const tmax = std::max(1.0, *std::max_element(t.begin(), t.end()));
    constexpr int grid = 281;
    std::vector<double> kap(grid + 1);
    kap[0] = 0;
    for (int i = 1; i <= grid; ++i)
        kap[i] = std::pow(10.0, -8.0 + 14.0 * (i - 1) / (grid - 1)) / tmax;
    int best = 0;
    double best_val = objective(0);
    for (int i = 1; i <= grid; ++i)
    {
        double v = objective(kap[i]);
        if (v < best_val)
        {
            best_val = v;
            best = i;
        }
    }
    if (best == 0)
    {
        fit.kappa = 0;
        fit.residual = best_val;
    }
    else
    {
        double const lo = kap[best - 1];
        double const hi = kap[std::min(best + 1, grid)];
        auto r = boost::math::tools::brent_find_minima(
            objective, lo, hi, std::numeric_limits<double>::digits);
        fit.kappa = r.first;
        fit.residual = r.second;
        if (best_val < fit.residual)
        {
            fit.kappa = kap[best];
            fit.residual = best_val;
        }
    }
    fit.degenerate = fit.constant_residual == 0 && fit.kappa == 0;
    return fit;
}

PowerLawFit fit_power_law(TimeSeries const& series)
{
    series.validate();
    std::size_t const n = series.size();
    if (n < 2)
    {
        throw Error(ErrorCode::domain, "power-law fit needs two samples");
    }
    double sx = 0, sy = 0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (series.times[i] <= 0 || !(series.values[i] > 0))
        {
            throw Error(ErrorCode::domain,
                        "power-law fit needs positive times and values");
        }
        x[i] = std::log(static_cast<double>(series.times[i]));
        y[i] = std::log(series.values[i]);
        sx += x[i];
        sy += y[i];
    }
    double const mx = sx / static_cast<double>(n);
    double const my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(my - fit.exponent * mx);
    fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

TimeSeries moving_average(TimeSeries const& series, std::size_t width)
{
    series.validate();
    if (width == 0 || width % 2 == 0)
    {
        throw Error(ErrorCode::domain, "moving-average width must be odd");
    }
    std::size_t const half = width / 2;
    TimeSeries out{series.label + "_smoothed", {}, {}};
    if (series.size() < width)
        return out;
    for (std::size_t i = half; i + half < series.size(); ++i)
    {
        double s = 0;
        for (std::size_t j = i - half; j <= i + half; ++j)
            s += series.values[j];
        out.times.push_back(series.times[i]);
        out.values.push_back(s / static_cast<double>(width));
    }
    return out;
}

//---------------------------------------------------------------------------//
LaplaceFit fit_laplace(std::span<double const> density,
                       std::size_t origin,
                       SiteWindow window)
{
    require_origin(density, origin);
    long const size = static_cast<long>(density.size());
    long const o = static_cast<long>(origin);
    if (window.stride < 1 || window.hi < window.lo || window.lo + o < 0
        || window.hi + o >= size)
    {
        throw Error(ErrorCode::window_invalid,
                    fmt::format("window [{}, {}] step {} is not inside the "
                                "lattice",
                                window.lo,
                                window.hi,
                                window.stride));
    }

    long x0 = window.lo;
    for (long x = window.lo; x <= window.hi; x += window.stride)
    {
        if (density[static_cast<std::size_t>(x + o)]
            > density[static_cast<std::size_t>(x0 + o)])
        {
            x0 = x;
        }
    }

    std::vector<double> xs, ys;
    for (long x = window.lo; x <= window.hi; x += window.stride)
    {
        double const d = density[static_cast<std::size_t>(x + o)];
        if (!(d > 0))
        {
            throw Error(ErrorCode::window_invalid,
                        fmt::format("density vanishes at x = {} inside the "
                                    "fit window",
                                    x));
        }
        xs.push_back(static_cast<double>(std::abs(x - x0)));
        ys.push_back(std::log(d));
    }
    if (xs.size() < 3)
    {
        throw Error(ErrorCode::window_invalid,
                    "Laplace fit needs at least three sites");
    }

    std::size_t const n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0))
    {
        throw Error(ErrorCode::window_invalid,
                    "Laplace fit window has no spread in |x - x0|");
    }
    double const slope = sxy / sxx;
    double const intercept = my - slope * mx;
    if (!(slope < 0))
    {
        throw Error(ErrorCode::window_invalid,
                    "log density does not decay away from the maximum");
    }

    LaplaceFit fit;
    fit.center = static_cast<double>(x0);
    fit.scale = -1.0 / slope;
    // log P = log(A / 2 delta) - |x - x0| / delta
    fit.amplitude = 2 * fit.scale * std::exp(intercept);
    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i)
        res[i] = ys[i] - (intercept + slope * xs[i]);
    fit.residual = sum_squares(res);
    fit.r_squared = syy > 0 ? 1.0 - fit.residual / syy : 1.0;
    fit.window = window;
    return fit;
}

SiteWindow default_laplace_window(std::span<double const> density,
                                  std::size_t origin,
                                  long t,
                                  double floor,
                                  long front_margin)
{
    require_origin(density, origin);
    long const o = static_cast<long>(origin);
    long const size = static_cast<long>(density.size());
    long const front = static_cast<long>(
        std::floor(static_cast<double>(t) / std::numbers::sqrt2));
    long const reach = std::min({front - front_margin, o, size - 1 - o});
    long const parity = ((t % 2) + 2) % 2;

    auto at = [&](long x) { return density[static_cast<std::size_t>(x + o)]; };
    auto on_sublattice = [&](long x) { return ((x - parity) % 2 + 2) % 2 == 0; };

    long x0 = parity;
    for (long x = -reach; x <= reach; ++x)
    {
        if (on_sublattice(x) && at(x) > at(x0))
            x0 = x;
    }
    long lo = x0;
    long hi = x0;
    while (lo - 2 >= -reach && at(lo - 2) > floor)
        lo -= 2;
    while (hi + 2 <= reach && at(hi + 2) > floor)
        hi += 2;
    return {lo, hi, 2};
}

//---------------------------------------------------------------------------//
double konno_limit_density(double x, KonnoForm form)
{
    double const edge = 1.0 / std::numbers::sqrt2;
    double const ax = std::abs(x);
    if (ax > edge)
        return 0;
    double const r2 = 1 - 2 * x * x;
    if (ax == edge || !(r2 > 0))
        return std::numeric_limits<double>::infinity();
    double const r1 = 1 - x * x;
    double const base = form == KonnoForm::normalized ? r1 : std::sqrt(r1);
    return 1.0 / (std::numbers::pi * base * std::sqrt(r2));
}

double konno_limit_cdf(double x)
{
    return konno_limit_cdf(x, 0.0);
}

double konno_asymmetry(Complex plus, Complex minus)
{
    return std::norm(plus) - std::norm(minus)
           + 2 * (plus * std::conj(minus)).real();
}

double konno_limit_cdf(double x, double asymmetry)
{
    double const edge = 1.0 / std::numbers::sqrt2;
    if (x <= -edge)
        return 0;
    if (x >= edge)
        return 1;
    double const w = std::sqrt(1 - 2 * x * x);
    // d/dx atan(x / w) = f(x) pi; d/dx [-atan(w)] = x f(x) pi
    return 0.5 + (std::atan(x / w) - asymmetry * std::atan(w))
                     / std::numbers::pi;
}

double konno_ks_distance(std::span<double const> density,
                         std::size_t origin,
                         long t,
                         double asymmetry)
{
    require_origin(density, origin);
    if (t <= 0)
    {
        throw Error(ErrorCode::domain, "KS distance needs t > 0");
    }
    double const tt = static_cast<double>(t);
    double cum = 0;
    double ks = 0;
    for (std::size_t i = 0; i < density.size(); ++i)
    {
        double const x = static_cast<double>(rel(i, origin)) / tt;
        double const f = konno_limit_cdf(x, asymmetry);
        // compare both sides of the jump at x
        ks = std::max(ks, std::abs(cum - f));
        cum += density[i];
        ks = std::max(ks, std::abs(cum - f));
    }
    return ks;
}

double heat_kernel_cog(double t, double constant)
{
    if (!(t > 0))
    {
        throw Error(ErrorCode::domain,
                    fmt::format("heat-kernel COG needs t > 0, got {}", t));
    }
    return constant * std::sqrt(t);
}

//---------------------------------------------------------------------------//
EnsembleDensity average_ensemble(std::span<DensitySnapshots const> runs)
{
    if (runs.empty())
    {
        throw Error(ErrorCode::shape_mismatch, "no runs to average");
    }
    auto const& first = runs.front();
    if (first.times.size() != first.densities.size())
    {
        throw Error(ErrorCode::shape_mismatch,
                    "snapshot times and densities differ in length");
    }
    std::size_t const sites
        = first.densities.empty() ? 0 : first.densities.front().size();
    for (auto const& r : runs)
    {
        bool ok = r.times == first.times
                  && r.densities.size() == first.densities.size();
        for (auto const& d : r.densities)
            ok = ok && d.size() == sites;
        if (!ok)
        {
            throw Error(ErrorCode::shape_mismatch,
                        "runs differ in snapshot times or lattice size");
        }
    }

    EnsembleDensity out;
    out.times = first.times;
    out.seed_count = runs.size();
    double const inv = 1.0 / static_cast<double>(runs.size());
    for (std::size_t k = 0; k < first.times.size(); ++k)
    {
        std::vector<double> mean(sites);
        for (std::size_t i = 0; i < sites; ++i)
        {
            CompensatedSum acc;
            for (auto const& r : runs)
                acc.add(r.densities[k][i]);
            mean[i] = acc.value() * inv;
        }
        out.mean_density.push_back(std::move(mean));
    }
    return out;
}

}  // namespace qwalk
