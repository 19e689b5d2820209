#pragma once

// Double-double arithmetic (Dekker/Knuth error-free transforms).
// Roughly 32 significant digits; used to survive the ill-conditioned
// coefficient-to-root map for eigenpolynomials of moderate degree.

#include <cmath>
#include <complex>

namespace lame::detail {

struct dd {
    double hi = 0.0;
    double lo = 0.0;

    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    double err = std::fma(a, b, -p);
    return {p, err};
}

inline dd operator+(dd a, dd b) {
    dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }

inline dd operator*(dd a, dd b) {
    dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) {
    double q0 = a.hi / b.hi;
    dd r = a - b * dd(q0);
    double q1 = (r.hi + r.lo) / (b.hi + b.lo);
    return quick_two_sum(q0, q1);
}

inline dd& operator+=(dd& a, dd b) { a = a + b; return a; }
inline dd& operator-=(dd& a, dd b) { a = a - b; return a; }
inline dd& operator*=(dd& a, dd b) { a = a * b; return a; }

inline bool operator<(dd a, dd b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline dd fabs(dd a) { return a.hi < 0 || (a.hi == 0 && a.lo < 0) ? -a : a; }

inline dd sqrt(dd a) {
    if (a.hi <= 0) return dd(0.0);
    double x = std::sqrt(a.hi);
    // one Newton step in dd
    dd r = a / dd(x);
    return (r + dd(x)) * dd(0.5);
}

struct ddc {
    dd re, im;
    ddc() = default;
    ddc(double r) : re(r), im(0.0) {}
    ddc(dd r, dd i) : re(r), im(i) {}
    ddc(std::complex<double> z) : re(z.real()), im(z.imag()) {}
    std::complex<double> to_complex() const {
        return {double(re), double(im)};
    }
};

inline ddc operator+(ddc a, ddc b) { return {a.re + b.re, a.im + b.im}; }
inline ddc operator-(ddc a, ddc b) { return {a.re - b.re, a.im - b.im}; }
inline ddc operator-(ddc a) { return {-a.re, -a.im}; }
inline ddc operator*(ddc a, ddc b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline ddc operator/(ddc a, ddc b) {
    dd d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline ddc& operator+=(ddc& a, ddc b) { a = a + b; return a; }
inline ddc& operator-=(ddc& a, ddc b) { a = a - b; return a; }
inline ddc& operator*=(ddc& a, ddc b) { a = a * b; return a; }

inline dd norm2(ddc a) { return a.re * a.re + a.im * a.im; }
inline dd abs(ddc a) { return sqrt(norm2(a)); }

} // namespace lame::detail
