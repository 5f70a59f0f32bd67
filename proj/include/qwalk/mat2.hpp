#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qwalk
{
using Complex = std::complex<double>;

//! Dense 2x2 complex matrix, row-major.
struct Mat2
{
    Complex a11{}, a12{}, a21{}, a22{};

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr Complex det() const { return a11 * a22 - a12 * a21; }
    constexpr Complex trace() const { return a11 + a22; }

    Mat2 adjoint() const
    {
        return {std::conj(a11), std::conj(a21), std::conj(a12), std::conj(a22)};
    }

    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }

    friend constexpr Mat2 operator*(Mat2 const& x, Mat2 const& y)
    {
        return {x.a11 * y.a11 + x.a12 * y.a21,
                x.a11 * y.a12 + x.a12 * y.a22,
                x.a21 * y.a11 + x.a22 * y.a21,
                x.a21 * y.a12 + x.a22 * y.a22};
    }

    friend constexpr Mat2 operator*(Complex s, Mat2 const& x)
    {
        return {s * x.a11, s * x.a12, s * x.a21, s * x.a22};
    }

    friend constexpr Mat2 operator+(Mat2 const& x, Mat2 const& y)
    {
        return {x.a11 + y.a11, x.a12 + y.a12, x.a21 + y.a21, x.a22 + y.a22};
    }

    friend constexpr Mat2 operator-(Mat2 const& x, Mat2 const& y)
    {
        return {x.a11 - y.a11, x.a12 - y.a12, x.a21 - y.a21, x.a22 - y.a22};
    }

    friend constexpr bool operator==(Mat2 const&, Mat2 const&) = default;

    constexpr std::array<Complex, 2> apply(Complex x, Complex y) const
    {
        return {a11 * x + a12 * y, a21 * x + a22 * y};
    }
};

//! Largest entrywise modulus of the difference.
inline double max_abs_diff(Mat2 const& x, Mat2 const& y)
{
    Mat2 d = x - y;
    return std::max({std::abs(d.a11), std::abs(d.a12), std::abs(d.a21),
                     std::abs(d.a22)});
}

//! max |(M M^H - I)_ij|
inline double unitarity_residual(Mat2 const& m)
{
    return max_abs_diff(m * m.adjoint(), Mat2::identity());
}

}  // namespace qwalk
