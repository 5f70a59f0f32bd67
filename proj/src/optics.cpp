#include "qwalk/optics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk::optics
{
namespace
{
void require_stack(std::span<Segment const> stack)
{
    if (stack.size() < 2)
    {
        throw Error(ErrorCode::domain,
                    "a stack needs at least two segments");
    }
    for (std::size_t i = 0; i < stack.size(); ++i)
    {
        if (!(stack[i].k > 0) || !std::isfinite(stack[i].k)
            || !std::isfinite(stack[i].a))
        {
            throw Error(ErrorCode::domain,
                        fmt::format("segment {} needs a finite k > 0", i));
        }
    }
}

//! Interface reflection coefficients r_j for j = 1..N (index j-1).
std::vector<double> reflections(std::span<Segment const> stack)
{
    std::vector<double> r;
    for (std::size_t j = 1; j < stack.size(); ++j)
        r.push_back(interface_reflection(stack[j - 1].k, stack[j].k));
    return r;
}
}  // namespace

//---------------------------------------------------------------------------//
double interface_reflection(double k_prev, double k_next)
{
    double const sum = k_next + k_prev;
    if (sum == 0)
    {
        throw Error(ErrorCode::singular_interface,
                    "k_prev + k_next vanishes at the interface");
    }
    return (k_next - k_prev) / sum;
}

double interface_transmission(double k_prev, double k_next)
{
    double const sum = k_next + k_prev;
    if (sum == 0)
    {
        throw Error(ErrorCode::singular_interface,
                    "k_prev + k_next vanishes at the interface");
    }
    return 2 * k_next / sum;
}

TransferMatrix interface_transfer(double k_prev, double k_next)
{
    double const r = interface_reflection(k_prev, k_next);
    double const t = interface_transmission(k_prev, k_next);
    return {{1.0 / t, r / t, r / t, 1.0 / t}};
}

SMatrix s_from_t(TransferMatrix const& tm)
{
    Mat2 const& m = tm.entries;
    if (m.a22 == Complex{0})
    {
        throw Error(ErrorCode::total_reflection_degenerate,
                    "T_22 vanishes; no scattering matrix exists");
    }
    Complex const inv = 1.0 / m.a22;
    return {{m.det() * inv, m.a12 * inv, -m.a21 * inv, inv}};
}

SMatrix flux_normalized(SMatrix const& s, double k_left, double k_right)
{
    double const lr = std::sqrt(k_left / k_right);
    Mat2 const& m = s.entries;
    return {{m.a11 / lr, m.a12, m.a21, m.a22 * lr}};
}

//---------------------------------------------------------------------------//
SMatrix composite_s(std::span<Segment const> stack)
{
    require_stack(stack);
    Mat2 total = interface_transfer(stack[0].k, stack[1].k).entries;
    for (std::size_t n = 2; n < stack.size(); ++n)
    {
        Complex const alpha = stack[n - 1].phase();
        Mat2 const dress{alpha, 0.0, 0.0, 1.0 / alpha};
        total = interface_transfer(stack[n - 1].k, stack[n].k).entries * dress
                * total;
        if (total.a22 == Complex{0})
        {
            throw Error(ErrorCode::total_reflection_degenerate,
                        fmt::format("partial product up to interface {} has "
                                    "T_22 = 0",
                                    n));
        }
    }
    return s_from_t({total});
}

SMatrix path_sum_s(std::span<Segment const> stack, int max_bounces)
{
    require_stack(stack);
    if (max_bounces < 0)
    {
        throw Error(ErrorCode::domain, "max_bounces must be non-negative");
    }
    std::size_t const interfaces = stack.size() - 1;
    std::vector<double> const r = reflections(stack);
    double rmax = 0;
    for (double x : r)
        rmax = std::max(rmax, std::abs(x));
    if (interfaces > 1 && rmax >= 1)
    {
        throw Error(ErrorCode::divergence,
                    "an interface reflects totally; the path series does "
                    "not converge");
    }

    // Interface j (1-based) joins segments j-1 and j.
    auto t_right = [&](std::size_t j) {  // crossing j left to right
        return interface_transmission(stack[j - 1].k, stack[j].k)
               * stack[j - 1].k / stack[j].k;
    };
    auto t_left = [&](std::size_t j) {  // crossing j right to left
        return interface_transmission(stack[j - 1].k, stack[j].k);
    };
    auto r_right_face = [&](std::size_t j) { return r[j - 1]; };  // from right
    auto r_left_face = [&](std::size_t j) { return -r[j - 1]; };  // from left

    int const max_refl = 2 * max_bounces + 1;
    std::size_t const inner = interfaces - 1;  // interior segments 1..N-1

    // amp[refl][seg][dir]: amplitude at the entry face of interior segment
    // seg (1-based), moving right (dir 0) or left (dir 1).
    auto solve = [&](bool from_left) {
        using Grid = std::vector<std::array<Complex, 2>>;
        std::vector<Grid> amp(max_refl + 1, Grid(inner + 2));
        Complex out_right = 0;
        Complex out_left = 0;

        auto emit = [&](int refl, std::size_t seg, int dir, Complex a) {
            if (refl > max_refl || a == Complex{0})
                return;
            amp[refl][seg][dir] += a;
        };
        // arrival of a wave moving right at interface j with amplitude a
        auto hit_from_left = [&](int refl, std::size_t j, Complex a) {
            if (j == interfaces)
                out_right += t_right(j) * a;
            else
                emit(refl, j, 0, t_right(j) * a);
            if (j == 1)
                out_left += r_left_face(j) * a;
            else
                emit(refl + 1, j - 1, 1, r_left_face(j) * a);
        };
        auto hit_from_right = [&](int refl, std::size_t j, Complex a) {
            if (j == 1)
                out_left += t_left(j) * a;
            else
                emit(refl, j - 1, 1, t_left(j) * a);
            if (j == interfaces)
                out_right += r_right_face(j) * a;
            else
                emit(refl + 1, j, 0, r_right_face(j) * a);
        };

        if (from_left)
            hit_from_left(0, 1, 1.0);
        else
            hit_from_right(0, interfaces, 1.0);

        for (int refl = 0; refl <= max_refl; ++refl)
        {
            auto& g = amp[refl];
            // Transmission keeps the reflection count, so sweep each
            // direction in its travel order.
            for (std::size_t seg = 1; seg <= inner; ++seg)
            {
                Complex a = g[seg][0];
                if (a == Complex{0})
                    continue;
                g[seg][0] = 0;
                hit_from_left(refl, seg + 1, a * stack[seg].phase());
            }
            for (std::size_t seg = inner; seg >= 1; --seg)
            {
                Complex a = g[seg][1];
                if (a == Complex{0})
                    continue;
                g[seg][1] = 0;
                hit_from_right(refl, seg, a * stack[seg].phase());
            }
        }
        return std::array<Complex, 2>{out_right, out_left};
    };

    auto const left = solve(true);
    auto const right = solve(false);
    return {{left[0], right[0], left[1], right[1]}};
}

SMatrix two_interface_closed_form(std::span<Segment const> stack)
{
    if (stack.size() != 3)
    {
        throw Error(ErrorCode::domain,
                    "the two-interface closed form needs three segments");
    }
    require_stack(stack);
    SMatrix const s1 = s_from_t(interface_transfer(stack[0].k, stack[1].k));
    SMatrix const s2 = s_from_t(interface_transfer(stack[1].k, stack[2].k));
    Complex const a = stack[1].phase();
    Complex const a2 = a * a;
    Complex const loop = 1.0 / (1.0 + s1.r() * s2.r() * a2);
    return {{s2.t() * a * loop * s1.t(),
             s2.r() + s2.t() * s2.t_prime() * s1.r() * a2 * loop,
             s1.r_prime() + s1.t_prime() * s1.t() * s2.r_prime() * a2 * loop,
             s1.t_prime() * a * loop * s2.t_prime()}};
}

SMatrix two_interface_printed_form(std::span<Segment const> stack)
{
    if (stack.size() != 3)
    {
        throw Error(ErrorCode::domain,
                    "the two-interface closed form needs three segments");
    }
    require_stack(stack);
    SMatrix const s1 = s_from_t(interface_transfer(stack[0].k, stack[1].k));
    SMatrix const s2 = s_from_t(interface_transfer(stack[1].k, stack[2].k));
    Complex const a = stack[1].phase();
    Complex const loop = 1.0 / (1.0 + s1.r() * s2.r() * a * a);
    return {{s2.t() * loop * s1.t(),
             s2.r() + s2.t() * s2.t_prime() * loop,
             s1.r() + s1.t() * s1.t_prime() * loop,
             s2.t() * loop * s1.t()}};
}

Coin qw_coin_from_s(SMatrix const& s, Complex alpha_left, Complex alpha_right)
{
    if (unitarity_residual(s.entries) > 1e-10)
    {
        throw Error(ErrorCode::invalid_scatterer,
                    "S-matrix is not unitary; normalize it to energy flux "
                    "first");
    }
    if (std::abs(std::abs(alpha_left) - 1) > 1e-12
        || std::abs(std::abs(alpha_right) - 1) > 1e-12)
    {
        throw Error(ErrorCode::invalid_scatterer,
                    "segment phases must be unimodular");
    }
    Mat2 const& m = s.entries;
    return {{alpha_right * m.a11,
             alpha_right * m.a12,
             alpha_left * m.a21,
             alpha_left * m.a22}};
}

std::vector<SMatrix> interface_s_matrices(std::span<Segment const> stack)
{
    require_stack(stack);
    std::vector<SMatrix> out;
    for (std::size_t j = 1; j < stack.size(); ++j)
        out.push_back(s_from_t(interface_transfer(stack[j - 1].k, stack[j].k)));
    return out;
}

}  // namespace qwalk::optics
