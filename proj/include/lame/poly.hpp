#pragma once

// Complex univariate polynomials in monomial form (ascending degree),
// root finding by Aberth-Ehrlich simultaneous iteration, and convex-hull
// helpers on root sets.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lame {

using cx = std::complex<double>;
using PointSet = std::vector<cx>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by roots() when the iteration cap is hit; carries the best iterate.
struct RootsError : Error {
    RootsError(const std::string& msg, std::vector<cx> b, double r)
        : Error(msg), best(std::move(b)), residual(r) {}
    std::vector<cx> best;
    double residual;
};

class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<cx> coeffs) : c_(std::move(coeffs)) { trim(); }
    Poly(std::initializer_list<cx> coeffs) : c_(coeffs) { trim(); }

    static Poly constant(cx v) { return Poly{std::vector<cx>{v}}; }
    static Poly identity() { return Poly{std::vector<cx>{0.0, 1.0}}; }
    static Poly from_roots(const PointSet& roots);

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<cx>& coeffs() const { return c_; }
    cx coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : cx{};
    }
    cx leading() const { return c_.empty() ? cx{} : c_.back(); }
    double max_coeff_mag() const;

private:
    // drop leading coefficients below 1e-14 relative to the largest one
    void trim();
    std::vector<cx> c_;
};

cx eval(const Poly& p, cx z);
Poly derivative(const Poly& p);
Poly mul(const Poly& p, const Poly& q);
Poly add(const Poly& p, const Poly& q);
Poly scale(const Poly& p, cx c);
Poly monic(const Poly& p); // error on zero polynomial

// p(a + b*z); used to move problems into a centered, radius-1 frame.
Poly compose_affine(const Poly& p, cx a, cx b);

// All roots with multiplicity (as nearby cluster points). Deterministic
// for a fixed seed. Scaled residual max|p(z_i)| / max|coeff| <= 1e-10,
// measured after centering/scaling so the bound is attainable.
PointSet roots(const Poly& p, std::uint64_t seed = 0x5eed);

// Groups a point set into clusters of radius <= tol; returns (center, count).
std::vector<std::pair<cx, int>> cluster_points(const PointSet& pts, double tol = 1e-4);

// Convex hull of a point set, vertices in counterclockwise order.
// Degenerate (collinear) sets yield the extreme segment endpoints.
PointSet convex_hull(const PointSet& s);

// 0 inside or on the hull, Euclidean distance outside.
double dist_to_hull(cx z, const PointSet& hull);

// Deterministic ordering used across reports.
void sort_points(PointSet& pts);

// splitmix64, the seeding engine for all stochastic starts
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace lame
