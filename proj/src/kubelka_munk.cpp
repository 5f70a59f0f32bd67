#include "qwalk/kubelka_munk.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk::km
{
void Layer::validate() const
{
    if (!(s >= 0) || !(k >= 0) || (s == 0 && k == 0) || !std::isfinite(s)
        || !std::isfinite(k))
    {
        throw Error(ErrorCode::domain,
                    fmt::format("layer needs s, k >= 0, not both zero "
                                "(s = {}, k = {})",
                                s,
                                k));
    }
    if (!(d > 0) || !std::isfinite(d))
    {
        throw Error(ErrorCode::domain,
                    fmt::format("layer thickness must be positive, got {}",
                                d));
    }
}

double Layer::q() const
{
    // (s + k)^2 - s^2 without cancellation
    return std::sqrt(k * (k + 2 * s));
}

Matrix generator(Layer const& layer)
{
    double const a = layer.s + layer.k;
    return {a, -layer.s, layer.s, -a};
}

Matrix propagator(Layer const& layer, double x)
{
    Matrix const g = generator(layer);
    double const q = layer.q();
    double c = 1;
    double sq = x;  // sinh(q x) / q
    if (q * std::abs(x) >= 1e-8)
    {
        c = std::cosh(q * x);
        sq = std::sinh(q * x) / q;
    }
    return {c + sq * g[0], sq * g[1], sq * g[2], c + sq * g[3]};
}

FluxPair apply(Matrix const& m, FluxPair f)
{
    return {m[0] * f.i + m[1] * f.j, m[2] * f.i + m[3] * f.j};
}

namespace
{
void require_depth(Layer const& layer, double x)
{
    layer.validate();
    if (!std::isfinite(x) || std::abs(x) > layer.d * (1 + 1e-12))
    {
        throw Error(ErrorCode::domain,
                    fmt::format("depth {} lies outside a layer of thickness "
                                "{}",
                                x,
                                layer.d));
    }
}
}  // namespace

FluxPair km_propagate(Layer const& layer, FluxPair boundary, double x)
{
    require_depth(layer, x);
    return km::apply(propagator(layer, x), boundary);
}

FluxPair km_propagate_inverse(Layer const& layer, FluxPair at_x, double x)
{
    require_depth(layer, x);
    return km::apply(propagator(layer, -x), at_x);
}

double km_r_infinity(double k_over_s)
{
    if (!(k_over_s >= 0))
    {
        throw Error(ErrorCode::domain,
                    fmt::format("k/s must be non-negative, got {}", k_over_s));
    }
    if (std::isinf(k_over_s))
        return 0;
    // 1 + x - sqrt(x^2 + 2x) = 1 / (1 + x + sqrt(x^2 + 2x))
    return 1.0 / (1.0 + k_over_s + std::sqrt(k_over_s * (k_over_s + 2)));
}

double km_invert(double r_infinity)
{
    if (!(r_infinity > 0) || r_infinity > 1)
    {
        throw Error(ErrorCode::domain,
                    fmt::format("R_inf must lie in (0, 1], got {}",
                                r_infinity));
    }
    double const a = 1 - r_infinity;
    return a * a / (2 * r_infinity);
}

FluxPair km_multilayer(std::span<Layer const> layers, FluxPair exit_flux)
{
    if (layers.empty())
    {
        throw Error(ErrorCode::domain, "stack needs at least one layer");
    }
    // f_bottom = exp(-S_n d_n) ... exp(-S_1 d_1) f_top, so
    // f_top = exp(S_1 d_1) ... exp(S_n d_n) f_bottom.
    FluxPair f = exit_flux;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    {
        it->validate();
        f = km::apply(propagator(*it, it->d), f);
    }
    return f;
}

FluxPair km_multilayer_forward(std::span<Layer const> layers, FluxPair top)
{
    if (layers.empty())
    {
        throw Error(ErrorCode::domain, "stack needs at least one layer");
    }
    FluxPair f = top;
    for (auto const& layer : layers)
    {
        layer.validate();
        f = km::apply(propagator(layer, -layer.d), f);
    }
    return f;
}

double km_stack_reflectance(std::span<Layer const> layers, double backing)
{
    if (!(backing >= 0) || backing > 1)
    {
        throw Error(ErrorCode::domain,
                    fmt::format("backing reflectance must lie in [0, 1], got "
                                "{}",
                                backing));
    }
    FluxPair const top = km_multilayer(layers, {1.0, backing});
    return top.j / top.i;
}

}  // namespace qwalk::km
