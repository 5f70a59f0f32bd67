#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "walk.hpp"

namespace qwalk
{
//---------------------------------------------------------------------------//
// Data carriers
//---------------------------------------------------------------------------//
//! Scalar observable indexed by strictly increasing time steps.
struct TimeSeries
{
    std::string label;
    std::vector<long> times;
    std::vector<double> values;

    std::size_t size() const { return times.size(); }

    //! Throws shape_mismatch / domain if the invariants are broken.
    void validate() const;

    //! Sub-series with lo <= t <= hi.
    TimeSeries slice(long lo, long hi) const;
};

//! Density snapshots from one run, all on the same lattice.
struct DensitySnapshots
{
    std::vector<long> times;
    std::vector<std::vector<double>> densities;
};

struct EnsembleDensity
{
    std::vector<long> times;
    std::vector<std::vector<double>> mean_density;
    std::size_t seed_count{0};
};

//! Inclusive range of positions relative to the origin, every `stride` sites.
struct SiteWindow
{
    long lo{0};
    long hi{0};
    long stride{1};
};

struct LaplaceFit
{
    double amplitude{0};  //!< A
    double center{0};  //!< x0 in sites, relative to the origin
    double scale{0};  //!< decay length delta_t in sites
    double residual{0};  //!< sum of squared log-residuals
    double r_squared{0};  //!< of the log-linear regression
    SiteWindow window;

    //! Model density A/(2 delta) exp(-|x - x0|/delta).
    double operator()(double x) const;
};

struct AlphaFit
{
    double kappa{0};
    double residual{0};  //!< sum of squares for 1/(kappa t + 1)
    double constant_alpha{0};  //!< best constant model (the mean)
    double constant_residual{0};
    bool degenerate{false};  //!< series carries no decay information

    double operator()(double t) const { return 1.0 / (kappa * t + 1.0); }
};

struct PowerLawFit
{
    double exponent{0};
    double prefactor{0};
    double r_squared{0};
};

//---------------------------------------------------------------------------//
// Single-density observables (positions relative to `origin`)
//---------------------------------------------------------------------------//
//! Center of gravity of the n >= 0 half, origin site included.
double cog_half(std::span<double const> density, std::size_t origin);
double cog_half(WalkState const& state);

//! Standard deviation of position.
double std_dev(std::span<double const> density, std::size_t origin);

//! Total density with |n| <= half_width.
double window_density(std::span<double const> density,
                      std::size_t origin,
                      long half_width);

//! Re sum_{n >= 0} plus_n conj(minus_n).
double correlation_eta(WalkState const& state);

/*!
 * Linear functionals of a density, enough to rebuild COG / SD / window
 * density of an ensemble mean from per-run values.
 */
struct DensityMoments
{
    double half_mass{0};
    double half_first{0};
    double mass{0};
    double first{0};
    double second{0};
    double window_mass{0};

    double cog() const;
    double sd() const;

    DensityMoments& operator+=(DensityMoments const& o);
};

DensityMoments density_moments(WalkState const& state, long window_half_width);

//---------------------------------------------------------------------------//
// Time-series analysis
//---------------------------------------------------------------------------//
/*!
 * Local COG exponent alpha(t) = (t / COG) dCOG/dt.
 *
 * Evaluated as the log-log slope between the points `half_window` records
 * before and after each t; the span is truncated at the series ends, which
 * gives one-sided differences there. half_window = 1 is the plain central
 * difference.
 */
TimeSeries cog_exponent_series(TimeSeries const& cog, int half_window = 5);

//! Least-squares kappa >= 0 for alpha(t) = 1/(kappa t + 1).
AlphaFit fit_alpha_model(TimeSeries const& alpha);

//! Least-squares fit of values = prefactor * t^exponent in log-log space.
PowerLawFit fit_power_law(TimeSeries const& series);

//! Centered moving average over `width` consecutive samples (width odd).
TimeSeries moving_average(TimeSeries const& series, std::size_t width);

//---------------------------------------------------------------------------//
// Laplace shape
//---------------------------------------------------------------------------//
/*!
 * Fit A/(2 delta) exp(-|x - x0|/delta) by regressing log density on
 * |x - x0| over the window, x0 being the density maximum.
 */
LaplaceFit fit_laplace(std::span<double const> density,
                       std::size_t origin,
                       SiteWindow window);

/*!
 * Default fit window at step t: sites of the parity of t, grown outward from
 * the density maximum while the density exceeds `floor`, and kept at least
 * `front_margin` sites inside the ballistic fronts at +-t/sqrt(2).
 */
SiteWindow default_laplace_window(std::span<double const> density,
                                  std::size_t origin,
                                  long t,
                                  double floor = 1e-6,
                                  long front_margin = 10);

//---------------------------------------------------------------------------//
// Reference curves
//---------------------------------------------------------------------------//
enum class KonnoForm
{
    normalized,  //!< 1 / (pi (1 - x^2) sqrt(1 - 2 x^2)), integrates to 1
    printed,  //!< 1 / (pi sqrt(1 - x^2) sqrt(1 - 2 x^2)), unnormalized legacy form
};

//! Weak-limit density of X_t / t for the Hadamard walk; +inf on the edge.
double konno_limit_density(double x, KonnoForm form = KonnoForm::normalized);

//! Cumulative distribution of the normalized limit density.
double konno_limit_cdf(double x);

/*!
 * Asymmetry coefficient c of the limit density (1 + c x) f(x) for a walk
 * started from (plus, minus) at the origin: c = |plus|^2 - |minus|^2 +
 * 2 Re(plus conj(minus)). c = 0 for (1, i)/sqrt(2); c = 1 for (1, 1)/sqrt(2).
 */
double konno_asymmetry(Complex plus, Complex minus);

//! CDF of (1 + c x) f(x).
double konno_limit_cdf(double x, double asymmetry);

/*!
 * Kolmogorov-Smirnov distance between the lattice distribution of X_t / t
 * and the limit law with asymmetry c.
 */
double konno_ks_distance(std::span<double const> density,
                         std::size_t origin,
                         long t,
                         double asymmetry = 0);

//! sqrt(t / 2 pi) by default; only the exponent 1/2 matters.
inline constexpr double heat_kernel_cog_constant = 0.3989422804014327;

double heat_kernel_cog(double t, double constant = heat_kernel_cog_constant);

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//
//! Pointwise mean, summed in input order with compensation.
EnsembleDensity average_ensemble(std::span<DensitySnapshots const> runs);

}  // namespace qwalk
