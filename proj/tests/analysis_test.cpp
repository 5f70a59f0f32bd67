#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "qwalk/analysis.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/error.hpp"

using namespace qwalk;

namespace
{
std::vector<double> delta_at(std::size_t n, std::size_t i)
{
    std::vector<double> d(n, 0.0);
    d[i] = 1;
    return d;
}

TimeSeries power_series(double c, double p, long lo, long hi, long stride = 1)
{
    TimeSeries s{"cog", {}, {}};
    for (long t = lo; t <= hi; t += stride)
    {
        s.times.push_back(t);
        s.values.push_back(c * std::pow(static_cast<double>(t), p));
    }
    return s;
}

ErrorCode code_of(auto&& f)
{
    try
    {
        f();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::io;
}
}  // namespace

TEST_CASE("time series invariants")
{
    TimeSeries ok{"x", {1, 2, 3}, {1, 2, 3}};
    CHECK_NOTHROW(ok.validate());
    TimeSeries uneven{"x", {1, 2}, {1}};
    CHECK_THROWS_AS(uneven.validate(), Error);
    TimeSeries unsorted{"x", {1, 3, 2}, {1, 2, 3}};
    CHECK_THROWS_AS(unsorted.validate(), Error);
    auto sl = ok.slice(2, 3);
    CHECK(sl.times == std::vector<long>{2, 3});
}

TEST_CASE("cog_half")
{
    std::size_t const n = 21, o = 10;
    CHECK(cog_half(delta_at(n, o + 5), o) == 5);
    std::vector<double> u(n, 0.0);
    u[o] = u[o + 1] = u[o + 2] = 1.0 / 3;
    CHECK(cog_half(u, o) == doctest::Approx(1).epsilon(1e-15));
    CHECK(cog_half(delta_at(n, o), o) == 0);
    CHECK(code_of([&] { cog_half(delta_at(n, o - 3), o); })
          == ErrorCode::undefined_cog);
}

TEST_CASE("cog_half is mirror invariant")
{
    // Mirror the left half onto the right: the half-side COG of the mirrored
    // data equals the left-side COG of the original, and mirroring twice is
    // the identity.
    std::size_t const n = 41, o = 20;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = 1.0 + std::sin(0.7 * static_cast<double>(i)) * 0.9;
    std::vector<double> mirror(d.rbegin(), d.rend());
    std::vector<double> back(mirror.rbegin(), mirror.rend());
    CHECK(cog_half(back, o) == cog_half(d, o));
    double num = 0, den = 0;
    for (std::size_t i = 0; i <= o; ++i)
    {
        num += static_cast<double>(o - i) * d[i];
        den += d[i];
    }
    CHECK(cog_half(mirror, o) == doctest::Approx(num / den).epsilon(1e-14));
    // A symmetric density has the same COG as its mirror.
    std::vector<double> sym(n);
    for (std::size_t i = 0; i < n; ++i)
        sym[i] = d[i] + d[n - 1 - i];
    std::vector<double> sym_m(sym.rbegin(), sym.rend());
    CHECK(cog_half(sym, o) == doctest::Approx(cog_half(sym_m, o)));
}

TEST_CASE("std_dev and window")
{
    std::size_t const n = 21, o = 10;
    CHECK(std_dev(delta_at(n, o), o) == 0);
    std::vector<double> pair(n, 0.0);
    pair[o - 4] = pair[o + 4] = 0.5;
    CHECK(std_dev(pair, o) == doctest::Approx(4).epsilon(1e-15));
    CHECK(window_density(delta_at(n, o), o, 5) == 1);
    CHECK(window_density(pair, o, 3) == 0);
    CHECK(code_of([&] { window_density(pair, o, 11); }) == ErrorCode::range);

    auto s = make_initial_state(201);
    CHECK(window_density(density(s), s.origin(), 50)
          == doctest::Approx(1).epsilon(1e-15));
}

TEST_CASE("density moments match the direct observables")
{
    std::size_t const n = 201;
    auto field = build_field({CoinFamilyTag::b_impurity, 0.4, 0, {}}, n);
    auto s = evolve(make_initial_state(n), field, 60);
    auto d = density(s);
    auto m = density_moments(s, 7);
    CHECK(m.cog() == doctest::Approx(cog_half(d, s.origin())).epsilon(1e-13));
    CHECK(m.sd() == doctest::Approx(std_dev(d, s.origin())).epsilon(1e-12));
    CHECK(m.window_mass
          == doctest::Approx(window_density(d, s.origin(), 7)).epsilon(1e-13));
    CHECK(m.mass == doctest::Approx(1).epsilon(1e-13));
}

TEST_CASE("correlation eta")
{
    auto s = make_initial_state(11);
    CHECK(correlation_eta(s) == doctest::Approx(0.5).epsilon(1e-15));
    // Hand-built state: only n >= 0 counts.
    WalkState w(11);
    w.plus()[5] = {0.5, 0.5};
    w.minus()[5] = {0.5, 0};
    w.plus()[4] = 1;
    w.minus()[4] = 1;
    CHECK(correlation_eta(w) == doctest::Approx(0.25));
}

TEST_CASE("COG exponent")
{
    auto lin = power_series(3.0, 1.0, 1, 50);
    auto a = cog_exponent_series(lin, 1);
    for (auto v : a.values)
        CHECK(std::abs(v - 1) < 1e-10);
    auto a5 = cog_exponent_series(lin);
    for (auto v : a5.values)
        CHECK(std::abs(v - 1) < 1e-10);

    auto root = power_series(2.0, 0.5, 100, 3000);
    for (int w : {1, 5})
    {
        auto ar = cog_exponent_series(root, w);
        for (auto v : ar.values)
            CHECK(std::abs(v - 0.5) < 1e-3);
    }
    auto bad = root;
    bad.values[3] = 0;
    CHECK(code_of([&] { cog_exponent_series(bad); }) == ErrorCode::domain);
    TimeSeries two{"c", {1, 2}, {1, 2}};
    CHECK_THROWS_AS(cog_exponent_series(two), Error);
}

TEST_CASE("alpha model fit")
{
    TimeSeries a{"alpha", {}, {}};
    for (long t = 200; t <= 3000; t += 25)
    {
        a.times.push_back(t);
        a.values.push_back(1.0 / (0.003 * static_cast<double>(t) + 1));
    }
    auto fit = fit_alpha_model(a);
    CHECK(std::abs(fit.kappa - 0.003) < 1e-6);
    CHECK(fit.residual < fit.constant_residual);
    CHECK(fit(0) == 1);

    TimeSeries ones{"alpha", a.times, std::vector<double>(a.size(), 1.0)};
    auto f1 = fit_alpha_model(ones);
    CHECK(f1.kappa == 0);
    CHECK(f1.degenerate);
    CHECK_THROWS_AS(fit_alpha_model(TimeSeries{"a", {}, {}}), Error);
}

TEST_CASE("alpha and kappa do not depend on the COG prefactor")
{
    // COG(t) = beta * t / (kappa t + 1) has alpha(t) = 1 / (kappa t + 1).
    for (double beta : {0.01, 1.0, 250.0})
    {
        TimeSeries c{"cog", {}, {}};
        for (long t = 25; t <= 3000; t += 25)
        {
            c.times.push_back(t);
            double const tt = static_cast<double>(t);
            c.values.push_back(beta * tt / (0.002 * tt + 1));
        }
        auto alpha = cog_exponent_series(c, 5);
        auto fit = fit_alpha_model(alpha.slice(200, 3000));
        CHECK(fit.kappa == doctest::Approx(0.0020).epsilon(0.05));
        static double first_kappa = fit.kappa;
        CHECK(fit.kappa == doctest::Approx(first_kappa).epsilon(1e-9));
    }
}

TEST_CASE("power law fit")
{
    auto s = power_series(0.7, 1.0, 500, 3000, 25);
    auto f = fit_power_law(s);
    CHECK(f.exponent == doctest::Approx(1).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(f.r_squared == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("moving average")
{
    TimeSeries s{"w", {0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 11}};
    auto m = moving_average(s, 3);
    CHECK(m.times == std::vector<long>{1, 2, 3, 4});
    CHECK(m.values[0] == doctest::Approx(1));
    CHECK(m.values[3] == doctest::Approx(6));
    CHECK_THROWS_AS(moving_average(s, 4), Error);
}

TEST_CASE("Laplace fit")
{
    std::size_t const n = 401, o = 200;
    double const delta = 25, amp = 1;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double const x = static_cast<double>(i) - o;
        d[i] = amp / (2 * delta) * std::exp(-std::abs(x) / delta);
    }
    auto f = fit_laplace(d, o, {-150, 150, 1});
    CHECK(std::abs(f.scale - 25) < 1e-9);
    CHECK(std::abs(f.amplitude - 1) < 1e-9);
    CHECK(f.center == 0);
    CHECK(f.r_squared == doctest::Approx(1).epsilon(1e-12));
    CHECK(f(0) == doctest::Approx(d[o]).epsilon(1e-9));

    // Off-center peak.
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double const x = static_cast<double>(i) - o - 12;
        g[i] = 0.3 * std::exp(-std::abs(x) / 9.0);
    }
    auto fg = fit_laplace(g, o, {-100, 120, 1});
    CHECK(fg.center == 12);
    CHECK(fg.scale == doctest::Approx(9).epsilon(1e-10));

    CHECK(code_of([&] { fit_laplace(delta_at(n, o), o, {-10, 10, 1}); })
          == ErrorCode::window_invalid);
}

TEST_CASE("default Laplace window stays on the walk's sublattice")
{
    std::size_t const n = 801;
    auto field = build_field({CoinFamilyTag::b_impurity, 0.5, 0, {}}, n);
    long const t = 300;
    auto s = evolve(make_initial_state(n), field, t);
    auto d = density(s);
    auto w = default_laplace_window(d, s.origin(), t);
    CHECK(w.stride == 2);
    CHECK(((w.lo - t) % 2 + 2) % 2 == 0);
    CHECK(w.hi <= static_cast<long>(t / std::numbers::sqrt2) - 10 + 1);
    CHECK(w.lo >= -static_cast<long>(t / std::numbers::sqrt2) + 10 - 1);
    for (long x = w.lo; x <= w.hi; x += 2)
        CHECK(d[static_cast<std::size_t>(x + static_cast<long>(s.origin()))]
              > 1e-6);
}

TEST_CASE("Konno limit density")
{
    CHECK(konno_limit_density(0) == doctest::Approx(1 / std::numbers::pi));
    CHECK(konno_limit_density(0.8) == 0);
    CHECK(konno_limit_density(-0.8) == 0);
    CHECK(std::isinf(konno_limit_density(1 / std::numbers::sqrt2)));
    CHECK(konno_limit_density(0, KonnoForm::printed)
          == doctest::Approx(1 / std::numbers::pi));

    // Quadrature of an independent transcription of the density. The
    // surd is evaluated from the distance to the support edge so the
    // endpoint singularity is resolved without cancellation.
    double const edge = 1 / std::numbers::sqrt2;
    auto ref = [](double x, double d, double c, bool printed) {
        double const surd
            = std::sqrt(std::numbers::sqrt2 * d
                        * (1 + std::numbers::sqrt2 * std::abs(x)));
        double const w = printed ? std::sqrt(1 - x * x) : 1 - x * x;
        return (1 + c * x) / (std::numbers::pi * w * surd);
    };
    boost::math::quadrature::tanh_sinh<double> q;
    auto integrate = [&](double hi, double c, bool printed) {
        bool const hi_is_edge = hi >= edge;
        return q.integrate(
            [&](double x, double xc) {
                double const d = xc < 0 ? -xc
                                 : hi_is_edge ? xc
                                              : edge - std::abs(x);
                return ref(x, d, c, printed);
            },
            -edge, std::min(hi, edge));
    };
    CHECK(std::abs(integrate(edge, 0, false) - 1) < 1e-6);
    CHECK(std::abs(integrate(edge, 0, true) - 1) > 0.1);
    for (double x : {-0.6, -0.3, 0.0, 0.2, 0.5})
        CHECK(std::abs(ref(x, edge - std::abs(x), 0, false)
                       - konno_limit_density(x))
              < 1e-12 * konno_limit_density(x));

    // CDF against quadrature, with and without asymmetry.
    for (double x : {-0.6, -0.3, 0.0, 0.2, 0.5, 0.7})
    {
        for (double c : {0.0, 1.0, -0.5})
        {
            CAPTURE(x);
            CAPTURE(c);
            CHECK(std::abs(konno_limit_cdf(x, c) - integrate(x, c, false))
                  < 1e-8);
        }
        CHECK(konno_limit_cdf(x) == doctest::Approx(konno_limit_cdf(x, 0)));
    }
    CHECK(konno_limit_cdf(-1) == 0);
    CHECK(konno_limit_cdf(1) == 1);
    CHECK(konno_asymmetry({1 / std::numbers::sqrt2, 0},
                          {0, 1 / std::numbers::sqrt2})
          == doctest::Approx(0).epsilon(1e-15));
    CHECK(konno_asymmetry(1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2)
          == doctest::Approx(1));
}

TEST_CASE("Konno asymmetry sign matches the walk")
{
    // Mean of X_t / t is c (1 - 1/sqrt2) under (1 + c x) f(x).
    std::size_t const n = lattice_size_for(1000);
    auto field = build_field({}, n);
    for (auto [p, m] : {std::pair<Complex, Complex>{1, 0},
                        std::pair<Complex, Complex>{0, 1},
                        std::pair<Complex, Complex>{std::sqrt(0.5),
                                                    Complex(0, std::sqrt(0.5))},
                        std::pair<Complex, Complex>{std::sqrt(0.5),
                                                    std::sqrt(0.5)}})
    {
        auto s = evolve(make_initial_state(n, p, m), field, 1000);
        auto d = density(s);
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i)
            mean += d[i] * static_cast<double>(s.position(i)) / 1000.0;
        double const c = konno_asymmetry(p, m);
        CHECK(mean == doctest::Approx(c * (1 - 1 / std::numbers::sqrt2))
                          .epsilon(0.01));
        CHECK(konno_ks_distance(d, s.origin(), 1000, c) < 0.05);
    }
}

TEST_CASE("heat kernel COG")
{
    CHECK(heat_kernel_cog_constant
          == doctest::Approx(std::sqrt(1 / (2 * std::numbers::pi))));
    CHECK(heat_kernel_cog(40) / heat_kernel_cog(10) == doctest::Approx(2));
    TimeSeries s{"hk", {}, {}};
    for (long t = 1; t <= 1000; ++t)
    {
        s.times.push_back(t);
        s.values.push_back(heat_kernel_cog(static_cast<double>(t)));
    }
    CHECK(std::abs(fit_power_law(s).exponent - 0.5) < 1e-12);
    CHECK(code_of([] { heat_kernel_cog(0); }) == ErrorCode::domain);
}

TEST_CASE("ensemble average")
{
    DensitySnapshots a{{0, 5}, {{0.1, 0.2, 0.7}, {0.0, 1.0, 0.0}}};
    auto one = average_ensemble(std::span(&a, 1));
    CHECK(one.seed_count == 1);
    CHECK(one.mean_density == a.densities);

    DensitySnapshots b{{0, 5}, {{0.7, 0.2, 0.1}, {0.0, 1.0, 0.0}}};
    std::vector<DensitySnapshots> runs{a, b};
    auto two = average_ensemble(runs);
    CHECK(two.seed_count == 2);
    CHECK(two.mean_density[0][0] == doctest::Approx(0.4));
    CHECK(two.mean_density[0][0] == two.mean_density[0][2]);

    DensitySnapshots c{{0}, {{1.0, 0.0, 0.0}}};
    runs.push_back(c);
    CHECK(code_of([&] { average_ensemble(runs); })
          == ErrorCode::shape_mismatch);
}
