#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/error.hpp"
#include "qwalk/optics.hpp"

using namespace qwalk;
using namespace qwalk::optics;

namespace
{
std::vector<Segment> random_stack(std::mt19937_64& gen, std::size_t segments)
{
    std::uniform_real_distribution<double> k(0.5, 2.0), a(0.1, 3.0);
    std::vector<Segment> s;
    for (std::size_t i = 0; i < segments; ++i)
        s.push_back({k(gen), a(gen)});
    return s;
}

std::vector<std::pair<double, double>> as_pairs(std::vector<Segment> const& s)
{
    std::vector<std::pair<double, double>> out;
    for (auto const& x : s)
        out.emplace_back(x.k, x.a);
    return out;
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

TEST_CASE("segment phase is unimodular")
{
    Segment s{1.7, 2.3};
    CHECK(std::abs(std::abs(s.phase()) - 1) < 1e-15);
    CHECK(std::abs(s.phase() - std::exp(Complex(0, 1.7 * 2.3))) < 1e-15);
}

TEST_CASE("interface transfer matrix")
{
    auto same = interface_transfer(2, 2).entries;
    CHECK(max_abs_diff(same, Mat2::identity()) < 1e-15);
    CHECK(interface_reflection(1, 3) == doctest::Approx(0.5));
    CHECK(interface_transmission(1, 3) == doctest::Approx(1.5));
    CHECK(interface_reflection(3, 1) == doctest::Approx(-0.5));
    auto t = interface_transfer(1, 3).entries;
    CHECK(t.a11 == t.a22);
    CHECK(t.a12 == t.a21);
    CHECK(std::abs(t.a11 - 1.0 / 1.5) < 1e-15);
    CHECK(std::abs(t.a12 - 0.5 / 1.5) < 1e-15);
    CHECK(std::abs(t.det()) > 0);
    CHECK(code_of([] { interface_transfer(1, -1); })
          == ErrorCode::singular_interface);
}

TEST_CASE("S from T")
{
    auto id = s_from_t({Mat2::identity()});
    CHECK(max_abs_diff(id.entries, Mat2::identity()) == 0);

    auto s = s_from_t(interface_transfer(1, 3));
    CHECK(std::abs(s.t() - 0.5) < 1e-15);
    CHECK(std::abs(s.t_prime() - 1.5) < 1e-15);
    CHECK(std::abs(s.r() - 0.5) < 1e-15);
    CHECK(std::abs(s.r_prime() + 0.5) < 1e-15);

    CHECK(code_of([] { s_from_t({{1.0, 1.0, 1.0, 0.0}}); })
          == ErrorCode::total_reflection_degenerate);
}

TEST_CASE("interface relations and energy balance")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> k(0.1, 5.0), u(-1, 1);
    for (int trial = 0; trial < 200; ++trial)
    {
        double const k0 = k(gen), k1 = k(gen);
        auto s = s_from_t(interface_transfer(k0, k1));
        double const rh = interface_reflection(k0, k1);
        double const th = interface_transmission(k0, k1);
        CHECK(std::abs(s.r() - rh) < 1e-14);
        CHECK(std::abs(s.r_prime() + rh) < 1e-14);
        CHECK(std::abs(s.t_prime() - th) < 1e-14);
        CHECK(std::abs(s.t() - k0 / k1 * th) < 1e-14);
        CHECK(std::abs(std::abs(s.entries.det()) - 1) < 1e-12);

        // Flux balance k|amplitude|^2 for random incoming waves.
        Complex const in_l(u(gen), u(gen)), in_r(u(gen), u(gen));
        auto [out_r, out_l] = s.entries.apply(in_l, in_r);
        double const in = k0 * std::norm(in_l) + k1 * std::norm(in_r);
        double const out = k1 * std::norm(out_r) + k0 * std::norm(out_l);
        CHECK(std::abs(in - out) < 1e-12 * std::max(1.0, in));

        auto f = flux_normalized(s, k0, k1);
        CHECK(unitarity_residual(f.entries) < 1e-12);
        CHECK(std::abs(f.t() - f.t_prime()) < 1e-12);
    }
}

TEST_CASE("composite S against the matching-condition oracle")
{
    std::mt19937_64 gen(5);
    for (std::size_t segs = 2; segs <= 6; ++segs)
    {
        for (int trial = 0; trial < 20; ++trial)
        {
            auto stack = random_stack(gen, segs);
            auto s = composite_s(stack);
            auto ref = oracle::matching_s(as_pairs(stack));
            CHECK(max_abs_diff(s.entries, ref) < 1e-12);
            auto f = flux_normalized(s, stack.front().k, stack.back().k);
            CHECK(unitarity_residual(f.entries) < 1e-12);
        }
    }
}

TEST_CASE("two-interface closed form")
{
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 100; ++trial)
    {
        auto stack = random_stack(gen, 3);
        auto s = composite_s(stack);
        CHECK(max_abs_diff(s.entries, two_interface_closed_form(stack).entries)
              < 1e-12);
    }
    Segment const a{1.0, 0}, b{2.5, 0.8}, c{1.5, 0};
    std::vector<Segment> st{a, b, c};
    // The legacy variant differs from the product.
    CHECK(max_abs_diff(two_interface_printed_form(st).entries,
                       composite_s(st).entries)
          > 1e-3);
    std::vector<Segment> two{a, b};
    CHECK_THROWS_AS(two_interface_closed_form(two), Error);
}

TEST_CASE("composite S basics")
{
    std::vector<Segment> flat{{1.3, 0.2}, {1.3, 0.7}, {1.3, 1.1}, {1.3, 4}};
    auto s = composite_s(flat);
    CHECK(std::abs(s.r()) < 1e-15);
    CHECK(std::abs(s.r_prime()) < 1e-15);
    CHECK(std::abs(s.t() - std::exp(Complex(0, 1.3 * 1.8))) < 1e-14);
    CHECK(std::abs(s.t_prime() - std::exp(Complex(0, 1.3 * 1.8))) < 1e-14);
    std::vector<Segment> one{{1.0, 1.0}};
    CHECK_THROWS_AS(composite_s(one), Error);
}

TEST_CASE("reversed stack swaps the two sides")
{
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 50; ++trial)
    {
        auto stack = random_stack(gen, 2 + trial % 4);
        auto s = composite_s(stack).entries;
        std::vector<Segment> rev(stack.rbegin(), stack.rend());
        auto r = composite_s(rev).entries;
        CHECK(std::abs(r.a11 - s.a22) < 1e-12);
        CHECK(std::abs(r.a22 - s.a11) < 1e-12);
        CHECK(std::abs(r.a12 - s.a21) < 1e-12);
        CHECK(std::abs(r.a21 - s.a12) < 1e-12);
        // Flux-normalized transmission is reciprocal.
        auto f = flux_normalized(composite_s(stack), stack.front().k,
                                 stack.back().k);
        CHECK(std::abs(f.t() - f.t_prime()) < 1e-12);
    }
}

TEST_CASE("composition over a split")
{
    // The S-matrix of a stack equals the combination of its two halves
    // joined in the shared segment; the Redheffer star product does that.
    auto star = [](Mat2 const& a, Mat2 const& b, Complex phase) {
        Complex const ta = a.a11, ra = a.a12, rpa = a.a21, tpa = a.a22;
        Complex const tb = b.a11, rb = b.a12, rpb = b.a21, tpb = b.a22;
        Complex const p2 = phase * phase;
        Complex const loop = 1.0 / (1.0 - ra * rpb * p2);
        return Mat2{tb * phase * loop * ta,
                    rb + tb * ra * tpb * p2 * loop,
                    rpa + tpa * rpb * ta * p2 * loop,
                    tpa * phase * loop * tpb};
    };
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 50; ++trial)
    {
        auto stack = random_stack(gen, 5);
        auto whole = composite_s(stack).entries;
        for (std::size_t cut = 1; cut + 1 < stack.size(); ++cut)
        {
            std::vector<Segment> lhs(stack.begin(), stack.begin() + cut + 1);
            std::vector<Segment> rhs(stack.begin() + cut, stack.end());
            auto joined = star(composite_s(lhs).entries,
                               composite_s(rhs).entries,
                               stack[cut].phase());
            CHECK(max_abs_diff(whole, joined) < 1e-12);
        }
    }
}

TEST_CASE("path sum")
{
    std::vector<Segment> st{{1.0, 0}, {2.5, 0.8}, {1.5, 0}};
    auto direct = path_sum_s(st, 0);
    auto s1 = s_from_t(interface_transfer(1.0, 2.5));
    auto s2 = s_from_t(interface_transfer(2.5, 1.5));
    CHECK(std::abs(direct.t() - s2.t() * st[1].phase() * s1.t()) < 1e-15);
    CHECK(max_abs_diff(path_sum_s(st, 40).entries, composite_s(st).entries)
          < 1e-10);

    // Truncation error shrinks like |r1 r2|^bounces.
    double const q = std::abs(s1.r() * s2.r());
    auto full = composite_s(st).entries;
    for (int b : {2, 4, 8})
    {
        double const err = max_abs_diff(path_sum_s(st, b).entries, full);
        CHECK(err < 10 * std::pow(q, b + 1));
    }

    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 100; ++trial)
    {
        auto stack = random_stack(gen, 3 + trial % 3);
        CHECK(max_abs_diff(path_sum_s(stack, 60).entries,
                           composite_s(stack).entries)
              < 1e-8);
    }
    CHECK_THROWS_AS(path_sum_s(st, -1), Error);
}

TEST_CASE("coin from S")
{
    auto c = qw_coin_from_s({Mat2::identity()}, 1.0, 1.0);
    CHECK(max_abs_diff(c.entries, Mat2::identity()) == 0);

    double const h = 1 / std::numbers::sqrt2;
    auto hc = qw_coin_from_s({{h, h, h, -h}}, 1.0, 1.0);
    CHECK(max_abs_diff(hc.entries, hadamard_coin().entries) < 1e-16);

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> ph(-3, 3);
    for (int trial = 0; trial < 50; ++trial)
    {
        auto stack = random_stack(gen, 3);
        auto f = flux_normalized(composite_s(stack), stack.front().k,
                                 stack.back().k);
        auto coin = qw_coin_from_s(f, std::polar(1.0, ph(gen)),
                                   std::polar(1.0, ph(gen)));
        CHECK(is_unitary(coin));
    }
    CHECK(code_of([] {
              qw_coin_from_s(s_from_t(interface_transfer(1, 3)), 1.0, 1.0);
          })
          == ErrorCode::invalid_scatterer);
    CHECK(code_of([] { qw_coin_from_s({Mat2::identity()}, 2.0, 1.0); })
          == ErrorCode::invalid_scatterer);
}
