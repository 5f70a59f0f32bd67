#pragma once

#include <span>
#include <vector>

#include "mat2.hpp"
#include "walk.hpp"

namespace qwalk::optics
{
//---------------------------------------------------------------------------//
/*!
 * Homogeneous slab of a piecewise-constant 1D medium.
 *
 * The wavevector k is real and positive (lossless medium).
 */
struct Segment
{
    double k{1};  //!< wavevector
    double a{1};  //!< width

    //! Single-pass phase factor exp(i k a).
    Complex phase() const { return std::polar(1.0, k * a); }
};

/*!
 * Maps (u, d) amplitudes on the left of an interface (or stack) to those on
 * the right.
 */
struct TransferMatrix
{
    Mat2 entries;
};

/*!
 * Scattering matrix (t, r; r', t').
 *
 * Maps the incoming amplitudes (from the left, from the right) to the
 * outgoing ones (to the right, to the left) in the plane-wave amplitude
 * normalization used by the transfer matrices.
 */
struct SMatrix
{
    Mat2 entries;

    Complex t() const { return entries.a11; }
    Complex r() const { return entries.a12; }
    Complex r_prime() const { return entries.a21; }
    Complex t_prime() const { return entries.a22; }
};

//! Interface from a medium with wavevector k_prev into one with k_next.
TransferMatrix interface_transfer(double k_prev, double k_next);

//! Fresnel-type coefficients r_hat = (k' - k)/(k' + k), t_hat = 2k'/(k' + k).
double interface_reflection(double k_prev, double k_next);
double interface_transmission(double k_prev, double k_next);

SMatrix s_from_t(TransferMatrix const& t);

/*!
 * Convert to the energy-flux normalization, in which a lossless scatterer
 * is unitary: entries are rescaled by sqrt(k_out / k_in).
 */
SMatrix flux_normalized(SMatrix const& s, double k_left, double k_right);

/*!
 * Scattering matrix of a stack of N+1 segments (N interfaces).
 *
 * Interior segments contribute their single-pass phase; the reference planes
 * sit on the first and last interfaces, so the outer segment widths do not
 * enter.
 */
SMatrix composite_s(std::span<Segment const> stack);

/*!
 * Same quantity as composite_s, evaluated as a sum over reflection /
 * transmission paths. A path with 2b or 2b+1 reflections completes b
 * internal round trips; paths with more than max_bounces round trips are
 * dropped.
 */
SMatrix path_sum_s(std::span<Segment const> stack, int max_bounces);

/*!
 * Closed form for two interfaces (three segments), built from the
 * single-interface coefficients and the loop factor (1 + r1 r2 alpha^2)^-1.
 */
SMatrix two_interface_closed_form(std::span<Segment const> stack);

/*!
 * Legacy two-interface variant, kept for comparison:
 * ((t2 L t1, r2 + t2 t2' L), (r1 + t1 t1' L, t2 L t1)) with
 * L = (1 + r1 r2 alpha^2)^-1.
 */
SMatrix two_interface_printed_form(std::span<Segment const> stack);

/*!
 * Quantum-walk coin realized by an S-matrix between segments with phases
 * alpha_left and alpha_right: rows (alpha_right t, alpha_right r) and
 * (alpha_left r', alpha_left t').
 */
Coin qw_coin_from_s(SMatrix const& s, Complex alpha_left, Complex alpha_right);

//! Interface S-matrix for each consecutive pair of segments.
std::vector<SMatrix> interface_s_matrices(std::span<Segment const> stack);

}  // namespace qwalk::optics
