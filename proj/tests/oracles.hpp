// Independent reference computations used by the unit and acceptance tests.
// None of these call into the code they check.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "qwalk/mat2.hpp"
#include "qwalk/walk.hpp"

namespace oracle
{
using qwalk::Complex;

//---------------------------------------------------------------------------//
// Walk: explicit sum over all move sequences
//---------------------------------------------------------------------------//
/*!
 * Amplitudes after T steps from (plus, minus) at the origin, obtained by
 * enumerating every sequence of T moves. A move from site n with component
 * c to component c' (c' = + goes right) picks up coin entry tau_n[c'][c].
 * Returns a map position -> (plus, minus).
 */
inline std::map<long, std::array<Complex, 2>>
path_sum(std::vector<qwalk::Mat2> const& coins,
         long origin,
         int steps,
         Complex plus0,
         Complex minus0)
{
    std::map<long, std::array<Complex, 2>> out;
    auto entry = [&](long n, int to, int from) {
        auto const& m = coins.at(static_cast<std::size_t>(origin + n));
        Complex const e[2][2] = {{m.a11, m.a12}, {m.a21, m.a22}};
        return e[to][from];
    };
    for (int c0 = 0; c0 < 2; ++c0)
    {
        Complex const a0 = c0 == 0 ? plus0 : minus0;
        if (a0 == Complex{})
            continue;
        for (unsigned long mask = 0; mask < (1ul << steps); ++mask)
        {
            long n = 0;
            int c = c0;
            Complex amp = a0;
            for (int s = 0; s < steps; ++s)
            {
                int const next = (mask >> s) & 1u;  // 0 = plus, 1 = minus
                amp *= entry(n, next, c);
                n += next == 0 ? 1 : -1;
                c = next;
            }
            out[n][c] += amp;
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
// Optics: direct solution of the matching conditions
//---------------------------------------------------------------------------//
//! Dense complex Gaussian elimination with partial pivoting.
inline std::vector<Complex>
solve(std::vector<std::vector<Complex>> a, std::vector<Complex> b)
{
    std::size_t const n = b.size();
    for (std::size_t col = 0; col < n; ++col)
    {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col]))
                piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r)
        {
            Complex const f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k)
                a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<Complex> x(n);
    for (std::size_t i = n; i-- > 0;)
    {
        Complex s = b[i];
        for (std::size_t k = i + 1; k < n; ++k)
            s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

/*!
 * Scattering matrix of a piecewise-constant medium from psi and psi'
 * continuity. Segment j carries U_j exp(i k_j x) + D_j exp(-i k_j x) in one
 * global coordinate; interface 1 sits at x = 0 and interior segment widths
 * set the later interface positions. Outgoing amplitudes are read at the
 * outermost interfaces. Returns ((t, r), (r', t')) where t, r' answer a wave
 * from the left and r, t' a wave from the right.
 */
inline qwalk::Mat2 matching_s(std::vector<std::pair<double, double>> const& ka)
{
    std::size_t const segs = ka.size();
    std::size_t const ifaces = segs - 1;
    std::vector<double> x(ifaces, 0.0);
    for (std::size_t n = 1; n < ifaces; ++n)
        x[n] = x[n - 1] + ka[n].second;
    std::size_t const unknowns = 2 * segs;
    auto U = [](std::size_t j) { return 2 * j; };
    auto D = [](std::size_t j) { return 2 * j + 1; };
    auto wave = [&](std::size_t j, double at, int sign) {
        return std::exp(Complex(0, sign * ka[j].first * at));
    };

    auto run = [&](Complex in_left, Complex in_right) {
        std::vector<std::vector<Complex>> a(unknowns,
                                            std::vector<Complex>(unknowns));
        std::vector<Complex> b(unknowns);
        std::size_t row = 0;
        for (std::size_t n = 0; n < ifaces; ++n)
        {
            std::size_t const l = n, r = n + 1;
            double const xn = x[n];
            a[row][U(l)] = wave(l, xn, 1);
            a[row][D(l)] = wave(l, xn, -1);
            a[row][U(r)] = -wave(r, xn, 1);
            a[row][D(r)] = -wave(r, xn, -1);
            ++row;
            a[row][U(l)] = ka[l].first * wave(l, xn, 1);
            a[row][D(l)] = -ka[l].first * wave(l, xn, -1);
            a[row][U(r)] = -ka[r].first * wave(r, xn, 1);
            a[row][D(r)] = ka[r].first * wave(r, xn, -1);
            ++row;
        }
        // Incoming amplitudes at the outer reference planes.
        a[row][U(0)] = wave(0, x.front(), 1);
        b[row++] = in_left;
        a[row][D(segs - 1)] = wave(segs - 1, x.back(), -1);
        b[row++] = in_right;
        auto sol = solve(a, b);
        Complex const out_right = sol[U(segs - 1)] * wave(segs - 1, x.back(), 1);
        Complex const out_left = sol[D(0)] * wave(0, x.front(), -1);
        return std::pair{out_right, out_left};
    };
    auto [t, rp] = run(1, 0);
    auto [r, tp] = run(0, 1);
    return {t, r, rp, tp};
}

//---------------------------------------------------------------------------//
// Kubelka-Munk: matrix exponential by scaling and squaring
//---------------------------------------------------------------------------//
using Real2 = std::array<long double, 4>;

inline Real2 mul(Real2 const& a, Real2 const& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

//! exp(M) via Taylor series on M / 2^s followed by s squarings.
inline Real2 expm(Real2 m)
{
    long double norm = 0;
    for (auto v : m)
        norm = std::max(norm, std::fabs(v));
    int s = 0;
    while (norm > 0.125L)
    {
        norm /= 2;
        ++s;
    }
    long double const scale = std::ldexp(1.0L, -s);
    for (auto& v : m)
        v *= scale;
    Real2 sum{1, 0, 0, 1};
    Real2 term{1, 0, 0, 1};
    for (int k = 1; k < 30; ++k)
    {
        term = mul(term, m);
        for (auto& v : term)
            v /= k;
        for (int i = 0; i < 4; ++i)
            sum[i] += term[i];
    }
    for (int i = 0; i < s; ++i)
        sum = mul(sum, sum);
    return sum;
}

}  // namespace oracle
