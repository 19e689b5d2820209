#include "lame/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lame/dd.hpp"

namespace lame {

ComplexMatrix ComplexMatrix::identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double ComplexMatrix::norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            cx aik = a(i, k);
            if (aik == cx{}) continue;
            for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

namespace {

struct Lu {
    ComplexMatrix lu;
    std::vector<int> perm;
    int sign = 1;
};

// boost_tiny: replace near-zero pivots instead of failing (inverse iteration)
Lu lu_factor(const ComplexMatrix& a, bool boost_tiny) {
    const int n = a.rows();
    Lu f{a, std::vector<int>(n), 1};
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    const double tiny = 1e-14 * a.norm_inf();

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(f.lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            double v = std::abs(f.lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        if (best <= tiny) {
            if (!boost_tiny) throw SingularMatrixError("lu_solve: numerically singular");
            f.lu(k, k) = (tiny > 0 ? tiny : 1e-300);
        }
        cx inv = 1.0 / f.lu(k, k);
        for (int i = k + 1; i < n; ++i) {
            cx m = f.lu(i, k) * inv;
            f.lu(i, k) = m;
            if (m == cx{}) continue;
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
        }
    }
    return f;
}

std::vector<cx> lu_apply(const Lu& f, const std::vector<cx>& b) {
    const int n = f.lu.rows();
    std::vector<cx> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

// The QR pipeline is templated over the scalar so the spectral module can
// run it in double-double: the falling-factorial matrices there have badly
// conditioned interior eigenvalues, and plain double starts land refinement
// in the wrong basins.

using detail::dd;
using detail::ddc;

inline double mag(const cx& z) { return std::abs(z); }
inline double mag(const ddc& z) { return double(detail::abs(z)); }
inline cx conj_of(const cx& z) { return std::conj(z); }
inline ddc conj_of(const ddc& z) { return {z.re, -z.im}; }
inline cx sqrt_c(const cx& z) { return std::sqrt(z); }
inline ddc sqrt_c(const ddc& z) {
    cx s0 = std::sqrt(z.to_complex());
    if (s0 == cx{}) return ddc(0.0);
    ddc s(s0);
    for (int i = 0; i < 2; ++i) s = (s + z / s) * ddc(0.5);
    return s;
}
inline double to_double(const cx& z) { (void)z; return 0.0; }
inline cx round_c(const cx& z) { return z; }
inline cx round_c(const ddc& z) { return z.to_complex(); }

template <class C>
struct Mat {
    int n = 0;
    std::vector<C> a;
    explicit Mat(int nn) : n(nn), a(size_t(nn) * nn) {}
    C& operator()(int i, int j) { return a[size_t(i) * n + j]; }
    const C& operator()(int i, int j) const { return a[size_t(i) * n + j]; }
};

template <class C>
void balance_t(Mat<C>& a) {
    const int n = a.n;
    const double radix2 = 4.0;
    bool done = false;
    int guard = 0;
    while (!done && guard++ < 100) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += mag(a(j, i));
                r += mag(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0, s = c + r;
            while (c < r / radix2) {
                c *= radix2;
                r /= radix2;
                f *= 2.0;
            }
            while (c >= r * radix2) {
                c /= radix2;
                r *= radix2;
                f /= 2.0;
            }
            if ((c + r) < 0.95 * s && f != 1.0) {
                done = false;
                C invf{1.0 / f};
                C ff{f};
                for (int j = 0; j < n; ++j) a(i, j) = a(i, j) * invf;
                for (int j = 0; j < n; ++j) a(j, i) = a(j, i) * ff;
            }
        }
    }
}

template <class C>
void hessenberg_t(Mat<C>& a) {
    const int n = a.n;
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += mag(a(i, k));
        if (scale == 0.0) continue;
        std::vector<C> v(n, C{0.0});
        for (int i = k + 1; i < n; ++i) v[i] = a(i, k) * C{1.0 / scale};
        // alpha = |v|, computed carefully in the scalar type
        auto norm2_of = [&]() {
            C acc{0.0};
            for (int i = k + 1; i < n; ++i) acc += conj_of(v[i]) * v[i];
            return acc;
        };
        C n2 = norm2_of();
        double alpha = std::sqrt(mag(n2));
        if (alpha == 0.0) continue;
        C phase = mag(v[k + 1]) == 0.0 ? C{1.0} : v[k + 1] * C{1.0 / mag(v[k + 1])};
        v[k + 1] += phase * C{alpha};
        n2 = norm2_of();
        double vn2 = mag(n2);
        if (vn2 == 0.0) continue;
        C beta = C{2.0} / n2;

        for (int j = 0; j < n; ++j) {
            C dot{0.0};
            for (int i = k + 1; i < n; ++i) dot += conj_of(v[i]) * a(i, j);
            dot = dot * beta;
            for (int i = k + 1; i < n; ++i) a(i, j) -= dot * v[i];
        }
        for (int i = 0; i < n; ++i) {
            C dot{0.0};
            for (int j = k + 1; j < n; ++j) dot += a(i, j) * v[j];
            dot = dot * beta;
            for (int j = k + 1; j < n; ++j) a(i, j) -= dot * conj_of(v[j]);
        }
        for (int i = k + 2; i < n; ++i) a(i, k) = C{0.0};
    }
}

// Shifted QR on an upper Hessenberg matrix; explicit single (Wilkinson)
// shift with deflation. Throws QrError with the deflated part on stall.
template <class C>
std::vector<cx> hessenberg_qr_t(Mat<C> h, double eps) {
    const int n = h.n;
    std::vector<cx> eig(n);
    int m = n - 1;
    long iter_total = 0;
    const long cap = 40L * std::max(1, n);
    int since_deflate = 0;

    while (m >= 0) {
        if (m == 0) {
            eig[0] = round_c(h(0, 0));
            --m;
            continue;
        }
        int l = m;
        while (l > 0) {
            double off = mag(h(l, l - 1));
            if (off <= eps * (mag(h(l - 1, l - 1)) + mag(h(l, l)))) {
                h(l, l - 1) = C{0.0};
                break;
            }
            --l;
        }
        if (l == m) {
            eig[m] = round_c(h(m, m));
            --m;
            since_deflate = 0;
            continue;
        }
        if (++iter_total > cap) {
            std::vector<cx> partial(eig.begin() + m + 1, eig.end());
            throw QrError("eigenvalues: QR did not converge", partial);
        }

        C sigma;
        if (++since_deflate % 12 == 0) {
            sigma = C{mag(h(m, m - 1)) + (m >= 2 ? mag(h(m - 1, m - 2)) : 0.0)};
        } else {
            C a = h(m - 1, m - 1), b = h(m - 1, m), c = h(m, m - 1), d = h(m, m);
            C tr2 = (a + d) * C{0.5};
            C disc = sqrt_c(tr2 * tr2 - (a * d - b * c));
            C l1 = tr2 + disc, l2 = tr2 - disc;
            sigma = (mag(l1 - d) < mag(l2 - d)) ? l1 : l2;
        }

        std::vector<double> cs(m);
        std::vector<C> sn(m, C{0.0});
        for (int i = l; i <= m; ++i) h(i, i) -= sigma;
        for (int i = l; i < m; ++i) {
            C x = h(i, i);
            C y = h(i + 1, i);
            double r = std::hypot(mag(x), mag(y));
            double c_;
            C s_{0.0};
            if (r == 0.0) {
                c_ = 1.0;
            } else if (mag(x) == 0.0) {
                c_ = 0.0;
                s_ = conj_of(y) * C{1.0 / mag(y)};
            } else {
                c_ = mag(x) / r;
                s_ = x * C{1.0 / mag(x)} * conj_of(y) * C{1.0 / r};
            }
            cs[i] = c_;
            sn[i] = s_;
            for (int j = i; j < n; ++j) {
                C hij = h(i, j), h1j = h(i + 1, j);
                h(i, j) = C{c_} * hij + s_ * h1j;
                h(i + 1, j) = C{0.0} - conj_of(s_) * hij + C{c_} * h1j;
            }
        }
        for (int i = l; i < m; ++i) {
            double c_ = cs[i];
            C s_ = sn[i];
            int bot = std::min(i + 1, m);
            for (int j = 0; j <= bot; ++j) {
                C hji = h(j, i), hj1 = h(j, i + 1);
                h(j, i) = C{c_} * hji + conj_of(s_) * hj1;
                h(j, i + 1) = C{0.0} - s_ * hji + C{c_} * hj1;
            }
        }
        for (int i = l; i <= m; ++i) h(i, i) += sigma;
    }
    return eig;
}

template <class C>
std::vector<cx> eigenvalues_impl(const ComplexMatrix& a, double eps) {
    const int n = a.rows();
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) return std::vector<cx>(n, cx{});
    Mat<C> h(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = C{a(i, j) / scale};
    balance_t(h);
    hessenberg_t(h);
    std::vector<cx> eig = hessenberg_qr_t(std::move(h), eps);
    for (cx& e : eig) e *= scale;
    return eig;
}

} // namespace

std::vector<cx> lu_solve(const ComplexMatrix& a, const std::vector<cx>& b) {
    if (a.rows() != a.cols() || int(b.size()) != a.rows())
        throw Error("lu_solve: shape mismatch");
    Lu f = lu_factor(a, false);
    return lu_apply(f, b);
}

cx det(const ComplexMatrix& a) {
    Lu f = lu_factor(a, false);
    cx d = double(f.sign);
    for (int i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
    return d;
}

std::vector<cx> eigenvalues(const ComplexMatrix& a) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw Error("eigenvalues: square matrix of size >= 1 required");
    return eigenvalues_impl<cx>(a, 2.0 * std::numeric_limits<double>::epsilon());
}

std::vector<cx> eigenvalues_dd(const ComplexMatrix& a) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw Error("eigenvalues: square matrix of size >= 1 required");
    return eigenvalues_impl<detail::ddc>(a, 1e-30);
}

std::vector<cx> eigenvector(const ComplexMatrix& a, cx lambda, std::uint64_t seed) {
    const int n = a.rows();
    ComplexMatrix b = a;
    for (int i = 0; i < n; ++i) b(i, i) -= lambda;
    Lu f = lu_factor(b, true);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cx> v(n);
    for (cx& e : v) e = cx{g(rng), g(rng)};

    double anorm = a.norm_inf();
    std::vector<cx> best;
    double best_res = 1e300;
    for (int it = 0; it < 5; ++it) {
        v = lu_apply(f, v);
        double nrm = 0.0;
        for (const cx& e : v) nrm += std::norm(e);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) break;
        for (cx& e : v) e /= nrm;

        double res = 0.0;
        for (int i = 0; i < n; ++i) {
            cx acc = -lambda * v[i];
            for (int j = 0; j < n; ++j) acc += a(i, j) * v[j];
            res = std::max(res, std::abs(acc));
        }
        if (res < best_res) {
            best_res = res;
            best = v;
        }
        if (best_res <= 1e-10 * anorm) break;
    }
    if (best_res > 1e-8 * anorm)
        throw Error("eigenvector: inverse iteration did not converge");
    return best;
}

ComplexMatrix companion_matrix(const Poly& p) {
    Poly q = monic(p);
    const int n = q.degree();
    if (n < 1) throw Error("companion_matrix: degree >= 1 required");
    ComplexMatrix m(n, n);
    for (int i = 0; i + 1 < n; ++i) m(i + 1, i) = 1.0;
    for (int i = 0; i < n; ++i) m(i, n - 1) = -q.coeff(i);
    return m;
}

} // namespace lame
