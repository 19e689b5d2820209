#pragma once

// Root-counting measures, Cauchy transforms, logarithmic potentials, and
// probe-based comparison of C^k against Vt/Qt away from the support.

#include <string>
#include <vector>

#include "lame/poly.hpp"

namespace lame {

struct OnSupportError : Error {
    using Error::Error;
};

struct RootMeasure {
    struct Atom {
        cx pos;
        double weight;
    };
    std::vector<Atom> atoms;

    static RootMeasure from_points(const PointSet& pts);
    double total_mass() const;
};

// uniform weight 1/deg on each root (multiplicity via repeated points)
RootMeasure from_poly(const Poly& p, std::uint64_t seed = 0x5eed);

cx cauchy(const RootMeasure& mu, cx z);       // sum w_j/(z - a_j)
double potential(const RootMeasure& mu, cx z); // sum w_j log|z - a_j|

struct HullCheck {
    double max_dist = 0.0;
    double eps = 0.0;
    bool pass = false;
    PointSet violators;
};

// max over points of dist to Conv(roots(hull_source)); pass iff <= eps
HullCheck hull_check(const PointSet& points, const Poly& hull_source, double eps);
HullCheck hull_check_pts(const PointSet& points, const PointSet& hull_pts, double eps);

struct ProbeRow {
    cx z;
    cx lhs;
    cx rhs;
    double abs_error;
};

struct ProbeReport {
    std::vector<ProbeRow> probes;
    double max_error = 0.0;
    int n = 0;
};

// 16 points on a circle of radius max|root(qk)| + 1.5 (standoff-filtered)
PointSet default_probes(const Poly& qk, int count = 16, double extra = 1.5,
                        double standoff = 0.5);

// lhs = cauchy(mu, z)^k, rhs = Vt(z)/monic(Qk)(z); probes must keep the
// configured standoff from Conv(roots Qk).
ProbeReport probe_compare(const RootMeasure& mu, const Poly& vt, const Poly& qk,
                          int k, const PointSet& probes, double standoff = 0.5);

// max_z |C_{p'}(z) - C_p(z)| over probes outside hull(roots p) + 0.5
double derivative_transform_gap(const Poly& p, const PointSet& probes);

} // namespace lame
