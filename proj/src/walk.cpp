#include "qwalk/walk.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk
{
namespace
{
/*!
 * Subnormal amplitudes count as zero. Products of 1/sqrt(2) factors along
 * the extreme path fall below 1e-308 long before t = 3000 but then stick at
 * the smallest subnormal instead of rounding to zero, so without this a
 * 6000-site lattice would report an overflow of probability ~1e-647.
 */
bool nonzero(Complex z)
{
    constexpr double tiny = std::numeric_limits<double>::min();
    return std::abs(z.real()) >= tiny || std::abs(z.imag()) >= tiny;
}

void require_lattice(std::size_t n)
{
    if (n < min_lattice_size)
    {
        throw Error(ErrorCode::invalid_lattice,
                    fmt::format("lattice size {} is below the minimum of {}",
                                n,
                                min_lattice_size));
    }
}
}  // namespace

bool is_unitary(Coin const& c, double tol)
{
    return unitarity_residual(c.entries) <= tol;
}

//---------------------------------------------------------------------------//
CoinField::CoinField(std::vector<Coin> coins, FieldProvenance provenance)
    : coins_(std::move(coins)), provenance_(std::move(provenance))
{
    require_lattice(coins_.size());
    for (std::size_t i = 0; i < coins_.size(); ++i)
    {
        if (!is_unitary(coins_[i]))
        {
            throw Error(ErrorCode::invalid_scatterer,
                        fmt::format("coin at site {} is not unitary", i));
        }
    }
    provenance_.lattice_size = coins_.size();
}

//---------------------------------------------------------------------------//
WalkState::WalkState(std::size_t lattice_size)
    : plus_(lattice_size), minus_(lattice_size)
{
    require_lattice(lattice_size);
}

WalkState make_initial_state(std::size_t lattice_size)
{
    double const h = 1.0 / std::numbers::sqrt2;
    return make_initial_state(lattice_size, h, h);
}

WalkState
make_initial_state(std::size_t lattice_size, Complex plus, Complex minus)
{
    WalkState s(lattice_size);
    double const n = std::norm(plus) + std::norm(minus);
    if (std::abs(n - 1.0) > 1e-12)
    {
        throw Error(ErrorCode::domain,
                    fmt::format("initial amplitudes have norm {}, expected 1",
                                n));
    }
    s.plus()[s.origin()] = plus;
    s.minus()[s.origin()] = minus;
    return s;
}

//---------------------------------------------------------------------------//
void step_into(WalkState const& state, CoinField const& field, WalkState& out)
{
    std::size_t const n = state.size();
    if (field.size() != n || out.size() != n)
    {
        throw Error(ErrorCode::shape_mismatch,
                    fmt::format("state has {} sites but coin field has {}",
                                n,
                                field.size()));
    }
    auto p = state.plus();
    auto m = state.minus();
    // Amplitude on an edge site would be shifted off the lattice.
    if (nonzero(p[0]) || nonzero(m[0]) || nonzero(p[n - 1])
        || nonzero(m[n - 1]))
    {
        throw BoundaryOverflow(
            -1, fmt::format("nonzero amplitude on a boundary site of a "
                            "{}-site lattice",
                            n));
    }

    auto op = out.plus();
    auto om = out.minus();
    op[0] = 0;
    om[n - 1] = 0;
    for (std::size_t i = 1; i < n; ++i)
    {
        Mat2 const& c = field[i - 1].entries;
        op[i] = c.a11 * p[i - 1] + c.a12 * m[i - 1];
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        Mat2 const& c = field[i + 1].entries;
        om[i] = c.a21 * p[i + 1] + c.a22 * m[i + 1];
    }
}

WalkState step(WalkState const& state, CoinField const& field)
{
    WalkState out(state.size());
    step_into(state, field, out);
    return out;
}

std::vector<double> density(WalkState const& state)
{
    std::vector<double> d(state.size());
    auto p = state.plus();
    auto m = state.minus();
    for (std::size_t i = 0; i < d.size(); ++i)
    {
        d[i] = std::norm(p[i]) + std::norm(m[i]);
    }
    return d;
}

double norm(WalkState const& state)
{
    double total = 0;
    for (double v : density(state))
    {
        total += v;
    }
    return total;
}

WalkState evolve(WalkState state,
                 CoinField const& field,
                 long steps,
                 std::span<Observer const> observers)
{
    if (steps < 0)
    {
        throw Error(ErrorCode::domain, "step count must be non-negative");
    }
    auto notify = [&](long t, WalkState const& s) {
        for (auto const& obs : observers)
        {
            obs(t, s);
        }
    };
    notify(0, state);
    WalkState next(state.size());
    for (long t = 1; t <= steps; ++t)
    {
        try
        {
            step_into(state, field, next);
        }
        catch (BoundaryOverflow const& e)
        {
            throw BoundaryOverflow(
                t, fmt::format("{} (step {})", e.what(), t));
        }
        std::swap(state, next);
        notify(t, state);
    }
    return state;
}

}  // namespace qwalk
