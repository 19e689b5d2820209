#include "lame/measure.hpp"

#include <algorithm>
#include <cmath>

namespace lame {

RootMeasure RootMeasure::from_points(const PointSet& pts) {
    if (pts.empty()) throw Error("RootMeasure: empty point set");
    RootMeasure m;
    const double w = 1.0 / double(pts.size());
    m.atoms.reserve(pts.size());
    for (cx p : pts) m.atoms.push_back({p, w});
    return m;
}

double RootMeasure::total_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms) s += a.weight;
    return s;
}

RootMeasure from_poly(const Poly& p, std::uint64_t seed) {
    if (p.degree() < 1) throw Error("from_poly: degree must be >= 1");
    return RootMeasure::from_points(roots(p, seed));
}

cx cauchy(const RootMeasure& mu, cx z) {
    cx s = 0.0;
    for (const auto& a : mu.atoms) {
        if (std::abs(z - a.pos) < 1e-12)
            throw OnSupportError("cauchy: evaluation point on support");
        s += a.weight / (z - a.pos);
    }
    return s;
}

double potential(const RootMeasure& mu, cx z) {
    double s = 0.0;
    for (const auto& a : mu.atoms) {
        double d = std::abs(z - a.pos);
        if (d < 1e-12) throw OnSupportError("potential: evaluation point on support");
        s += a.weight * std::log(d);
    }
    return s;
}

HullCheck hull_check_pts(const PointSet& points, const PointSet& hull_pts, double eps) {
    PointSet hull = convex_hull(hull_pts);
    HullCheck hc;
    hc.eps = eps;
    for (cx p : points) {
        double d = dist_to_hull(p, hull);
        hc.max_dist = std::max(hc.max_dist, d);
        if (d > eps) hc.violators.push_back(p);
    }
    hc.pass = hc.violators.empty();
    return hc;
}

HullCheck hull_check(const PointSet& points, const Poly& hull_source, double eps) {
    return hull_check_pts(points, roots(hull_source), eps);
}

PointSet default_probes(const Poly& qk, int count, double extra, double standoff) {
    PointSet qroots = roots(qk);
    double rmax = 0.0;
    for (cx r : qroots) rmax = std::max(rmax, std::abs(r));
    PointSet hull = convex_hull(qroots);
    PointSet out;
    for (int i = 0; i < count; ++i) {
        cx z = std::polar(rmax + extra, 2.0 * M_PI * i / count);
        if (dist_to_hull(z, hull) >= standoff) out.push_back(z);
    }
    return out;
}

ProbeReport probe_compare(const RootMeasure& mu, const Poly& vt, const Poly& qk,
                          int k, const PointSet& probes, double standoff) {
    if (std::abs(vt.leading() - cx{1.0}) > 1e-9)
        throw Error("probe_compare: Vt must be monic");
    Poly qt = monic(qk);
    PointSet hull = convex_hull(roots(qk));

    ProbeReport rep;
    rep.n = static_cast<int>(mu.atoms.size());
    for (cx z : probes) {
        if (dist_to_hull(z, hull) < standoff) {
            throw Error("probe_compare: probe (" + std::to_string(z.real()) + ", " +
                        std::to_string(z.imag()) + ") is inside the standoff region");
        }
        cx c = cauchy(mu, z);
        cx lhs = 1.0;
        for (int i = 0; i < k; ++i) lhs *= c;
        cx rhs = eval(vt, z) / eval(qt, z);
        rep.probes.push_back({z, lhs, rhs, std::abs(lhs - rhs)});
        rep.max_error = std::max(rep.max_error, std::abs(lhs - rhs));
    }
    return rep;
}

double derivative_transform_gap(const Poly& p, const PointSet& probes) {
    const int n = p.degree();
    if (n < 2) throw Error("derivative_transform_gap: degree must be >= 2");
    // C_p = p'/(n p) and C_{p'} = p''/((n-1) p') exactly; evaluating the
    // rational forms avoids root extraction, which stops being forward
    // accurate for high degrees.
    Poly d1 = derivative(p);
    Poly d2 = derivative(d1);

    bool have_hull = false;
    PointSet hull;
    if (n <= 60) {
        try {
            hull = convex_hull(roots(p));
            have_hull = true;
        } catch (const RootsError&) {
        }
    }
    double gap = 0.0;
    for (cx z : probes) {
        if (have_hull && dist_to_hull(z, hull) < 0.5)
            throw Error("derivative_transform_gap: probe inside standoff region");
        cx cp = eval(d1, z) / (double(n) * eval(p, z));
        cx cd = eval(d2, z) / (double(n - 1) * eval(d1, z));
        // |C| <= 1/dist(z, roots): a cheap necessary condition on the standoff
        if (std::abs(cp) > 2.0 || std::abs(cd) > 2.0)
            throw Error("derivative_transform_gap: probe inside standoff region");
        gap = std::max(gap, std::abs(cd - cp));
    }
    return gap;
}

} // namespace lame
