#pragma once

#include <array>
#include <span>

namespace qwalk::km
{
//! Paint layer: scattering s, absorption k (per length), thickness d.
struct Layer
{
    double s{1};
    double k{0};
    double d{1};

    //! Throws Error(domain) unless s, k >= 0 (not both zero) and d > 0.
    void validate() const;

    //! q = sqrt((s + k)^2 - s^2).
    double q() const;
};

//! Downward (i) and upward (j) diffuse intensities.
struct FluxPair
{
    double i{0};
    double j{0};
};

//! Real 2x2 matrix, row-major.
using Matrix = std::array<double, 4>;

//! Generator ((s + k, -s), (s, -(s + k))).
Matrix generator(Layer const& layer);

/*!
 * exp(S x) in closed form: cosh(q x) I + sinh(q x)/q S. For q |x| < 1e-8
 * the limit I + S x is used.
 *
 * Depth runs downward into the paint, i.e. x <= 0 inside the layer.
 */
Matrix propagator(Layer const& layer, double x);

FluxPair apply(Matrix const& m, FluxPair f);

//! Flux at depth x given the flux at x = 0; requires |x| <= d.
FluxPair km_propagate(Layer const& layer, FluxPair boundary, double x);

//! Inverse of km_propagate: flux at 0 given the flux at x.
FluxPair km_propagate_inverse(Layer const& layer, FluxPair at_x, double x);

//! Reflectance 1 + k/s - sqrt((k/s)^2 + 2 k/s) of a semi-infinite layer.
double km_r_infinity(double k_over_s);

//! k/s = (1 - R)^2 / (2 R).
double km_invert(double r_infinity);

/*!
 * Surface flux (i0, j0) of a stack, layers listed from the surface down,
 * given the flux at the bottom (depth -sum d).
 */
FluxPair km_multilayer(std::span<Layer const> layers, FluxPair exit_flux);

//! Bottom flux given the surface flux; inverse of km_multilayer.
FluxPair km_multilayer_forward(std::span<Layer const> layers, FluxPair top);

/*!
 * Diffuse reflectance j0 / i0 of a stack over a backing that reflects a
 * fraction `backing` of the light reaching it.
 */
double km_stack_reflectance(std::span<Layer const> layers, double backing);

}  // namespace qwalk::km
