#include "lame/poly.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lame {

void Poly::trim() {
    double m = 0.0;
    for (const cx& v : c_) m = std::max(m, std::abs(v));
    if (m == 0.0) {
        c_.clear();
        return;
    }
    while (!c_.empty() && std::abs(c_.back()) <= 1e-14 * m) c_.pop_back();
}

double Poly::max_coeff_mag() const {
    double m = 0.0;
    for (const cx& v : c_) m = std::max(m, std::abs(v));
    return m;
}

Poly Poly::from_roots(const PointSet& roots) {
    std::vector<cx> c{1.0};
    for (cx r : roots) {
        c.push_back(0.0);
        for (int i = static_cast<int>(c.size()) - 1; i > 0; --i)
            c[i] = c[i - 1] - r * c[i];
        c[0] *= -r;
    }
    return Poly(std::move(c));
}

cx eval(const Poly& p, cx z) {
    cx acc = 0.0;
    const auto& c = p.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Poly derivative(const Poly& p) {
    if (p.degree() < 1) return Poly{};
    std::vector<cx> d(p.degree());
    for (int i = 1; i <= p.degree(); ++i) d[i - 1] = p.coeff(i) * double(i);
    return Poly(std::move(d));
}

Poly mul(const Poly& p, const Poly& q) {
    if (p.is_zero() || q.is_zero()) return Poly{};
    std::vector<cx> r(p.coeffs().size() + q.coeffs().size() - 1, cx{});
    for (size_t i = 0; i < p.coeffs().size(); ++i)
        for (size_t j = 0; j < q.coeffs().size(); ++j)
            r[i + j] += p.coeffs()[i] * q.coeffs()[j];
    return Poly(std::move(r));
}

Poly add(const Poly& p, const Poly& q) {
    std::vector<cx> r(std::max(p.coeffs().size(), q.coeffs().size()), cx{});
    for (size_t i = 0; i < r.size(); ++i) r[i] = p.coeff(int(i)) + q.coeff(int(i));
    return Poly(std::move(r));
}

Poly scale(const Poly& p, cx c) {
    std::vector<cx> r = p.coeffs();
    for (cx& v : r) v *= c;
    return Poly(std::move(r));
}

Poly monic(const Poly& p) {
    if (p.is_zero()) throw Error("monic: zero polynomial");
    return scale(p, 1.0 / p.leading());
}

Poly compose_affine(const Poly& p, cx a, cx b) {
    std::vector<cx> acc{cx{}};
    const auto& c = p.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        // acc = acc*(a + b z) + coeff
        std::vector<cx> next(acc.size() + 1, cx{});
        for (size_t i = 0; i < acc.size(); ++i) {
            next[i] += acc[i] * a;
            next[i + 1] += acc[i] * b;
        }
        next[0] += *it;
        acc = std::move(next);
    }
    return Poly(std::move(acc));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

// Aberth-Ehrlich on a centered and radius-normalized copy of the input.
// Returns roots in the normalized frame.
struct AberthResult {
    std::vector<cx> roots;
    double residual; // max |q(z_i)| / max|q coeff|
    bool converged;
};

AberthResult aberth(const std::vector<cx>& q, std::uint64_t seed) {
    const int n = static_cast<int>(q.size()) - 1;
    std::vector<cx> d(n);
    for (int i = 1; i <= n; ++i) d[i - 1] = q[i] * double(i);

    auto horner = [](const std::vector<cx>& c, cx z) {
        cx acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
        return acc;
    };

    // Cauchy-style radius bound
    double R = 0.0;
    for (int j = 0; j < n; ++j)
        R = std::max(R, std::pow(std::abs(q[j] / q[n]), 1.0 / (n - j)));
    R = 2.0 * R + 1e-12;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.5 / n, 0.5 / n);
    std::vector<cx> z(n);
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * M_PI * (i + 0.5) / n + 0.31 + jitter(rng);
        double rad = R * (0.5 + 0.5 * double(i + 1) / n);
        z[i] = std::polar(rad, th);
    }

    const int max_sweeps = 220;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            cx pv = horner(q, z[i]);
            cx dv = horner(d, z[i]);
            cx N = (dv == cx{}) ? cx{0.1, 0.05} : pv / dv;
            cx S = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) S += 1.0 / (z[i] - z[j]);
            cx denom = 1.0 - N * S;
            cx step = (std::abs(denom) < 1e-300) ? N : N / denom;
            z[i] -= step;
            worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
        }
        if (worst < 1e-15) break;
    }
    // Newton polish
    for (int pass = 0; pass < 3; ++pass)
        for (int i = 0; i < n; ++i) {
            cx dv = horner(d, z[i]);
            if (std::abs(dv) > 0) z[i] -= horner(q, z[i]) / dv;
        }

    double maxq = 0.0;
    for (const cx& v : q) maxq = std::max(maxq, std::abs(v));
    double res = 0.0;
    for (int i = 0; i < n; ++i) res = std::max(res, std::abs(horner(q, z[i])));
    res /= maxq;
    return {std::move(z), res, res <= 1e-10};
}

} // namespace

PointSet roots(const Poly& p, std::uint64_t seed) {
    if (p.degree() < 1) throw Error("roots: degree must be >= 1");

    std::vector<cx> c = p.coeffs();
    const int n = static_cast<int>(c.size()) - 1;

    // factor out exact zero roots at the origin
    int zero_mult = 0;
    double m = p.max_coeff_mag();
    while (zero_mult < n && std::abs(c[zero_mult]) <= 1e-300 * m) ++zero_mult;
    if (zero_mult > 0) c.erase(c.begin(), c.begin() + zero_mult);

    PointSet out(zero_mult, cx{0.0, 0.0});
    const int nn = static_cast<int>(c.size()) - 1;
    if (nn >= 1) {
        // center at the root centroid, then scale by the Cauchy bound
        cx mu = -c[nn - 1] / (double(nn) * c[nn]);
        // Taylor shift by repeated synthetic division: shifted[i] = p^{(i)}(mu)/i!
        std::vector<cx> shifted(c.size());
        std::vector<cx> work = c;
        for (int i = 0; i <= nn; ++i) {
            int m = nn - i;
            cx b = work[m];
            for (int j = m - 1; j >= 0; --j) {
                cx tmp = work[j] + mu * b;
                work[j] = b;
                b = tmp;
            }
            shifted[i] = b;
        }

        double Rb = 0.0;
        for (int j = 0; j < nn; ++j)
            Rb = std::max(Rb, std::pow(std::abs(shifted[j] / shifted[nn]), 1.0 / (nn - j)));
        if (Rb == 0.0) Rb = 1.0;
        std::vector<cx> q(shifted.size());
        double rpow = 1.0;
        for (int j = 0; j <= nn; ++j) {
            q[j] = shifted[j] * rpow;
            rpow *= Rb;
        }
        double qm = 0.0;
        for (const cx& v : q) qm = std::max(qm, std::abs(v));
        for (cx& v : q) v /= qm;

        AberthResult r = aberth(q, seed);
        PointSet found(r.roots.size());
        for (size_t i = 0; i < r.roots.size(); ++i) found[i] = mu + Rb * r.roots[i];
        if (!r.converged) {
            PointSet best = out;
            best.insert(best.end(), found.begin(), found.end());
            sort_points(best);
            throw RootsError("roots: Aberth iteration did not reach tolerance", best,
                             r.residual);
        }
        out.insert(out.end(), found.begin(), found.end());
    }
    sort_points(out);
    return out;
}

std::vector<std::pair<cx, int>> cluster_points(const PointSet& pts, double tol) {
    std::vector<std::pair<cx, int>> clusters;
    std::vector<bool> used(pts.size(), false);
    for (size_t i = 0; i < pts.size(); ++i) {
        if (used[i]) continue;
        cx sum = pts[i];
        int count = 1;
        used[i] = true;
        for (size_t j = i + 1; j < pts.size(); ++j) {
            if (!used[j] && std::abs(pts[j] - pts[i]) <= tol) {
                sum += pts[j];
                ++count;
                used[j] = true;
            }
        }
        clusters.emplace_back(sum / double(count), count);
    }
    return clusters;
}

void sort_points(PointSet& pts) {
    std::sort(pts.begin(), pts.end(), [](cx a, cx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

namespace {
double cross(cx o, cx a, cx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
}
} // namespace

PointSet convex_hull(const PointSet& s) {
    if (s.empty()) throw Error("convex_hull: empty point set");
    PointSet pts = s;
    sort_points(pts);
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](cx a, cx b) { return a == b; }),
              pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;

    // Andrew monotone chain, strict turns (collinear points dropped)
    PointSet h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    if (h.size() < 2) { // fully collinear: keep the two extremes
        PointSet seg{pts.front(), pts.back()};
        return seg;
    }
    return h;
}

double dist_to_hull(cx z, const PointSet& hull) {
    if (hull.empty()) throw Error("dist_to_hull: empty hull");
    if (hull.size() == 1) return std::abs(z - hull[0]);

    auto seg_dist = [](cx p, cx a, cx b) {
        cx e = b - a;
        double len2 = std::norm(e);
        if (len2 == 0.0) return std::abs(p - a);
        double t = ((p.real() - a.real()) * e.real() + (p.imag() - a.imag()) * e.imag()) / len2;
        t = std::clamp(t, 0.0, 1.0);
        return std::abs(p - (a + t * e));
    };

    const size_t m = hull.size();
    bool inside = m >= 3;
    double dmin = 1e300;
    for (size_t i = 0; i < m; ++i) {
        cx a = hull[i], b = hull[(i + 1) % m];
        dmin = std::min(dmin, seg_dist(z, a, b));
        if (m >= 3 && cross(a, b, z) < 0) inside = false;
    }
    return inside ? 0.0 : dmin;
}

} // namespace lame
