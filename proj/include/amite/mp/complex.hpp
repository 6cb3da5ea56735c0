#pragma once

#include "amite/mp/real.hpp"

#include <span>
#include <utility>

namespace amite::mp {

/// Complex number as a pair of high-precision reals. Only the handful of
/// operations the oscillating-error closed form needs.
struct Complex {
    Real re;
    Real im;

    explicit Complex(int digits) : re(digits), im(digits) {}
    Complex(Real real, Real imag) : re(std::move(real)), im(std::move(imag)) {}

    int digits() const { return re.digits() > im.digits() ? re.digits() : im.digits(); }

    Complex conj() const { return {re, -im}; }
    Real norm2() const { return re * re + im * im; }

    friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
    friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator*(const Complex& a, const Real& b) { return {a.re * b, a.im * b}; }
    friend Complex operator/(const Complex& a, const Complex& b) {
        const Real d = b.norm2();
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    friend Complex operator/(const Complex& a, const Real& b) { return {a.re / b, a.im / b}; }
};

/// e^(i theta).
Complex expi(const Real& theta);

/// pFq series with complex parameters and a real argument, same stopping rule
/// and signature restrictions as the real version.
Complex hypergeometric(std::span<const Complex> a, std::span<const Complex> b, const Real& z);

}  // namespace amite::mp
