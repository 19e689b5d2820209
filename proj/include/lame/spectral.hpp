#pragma once

// Enumeration and refinement of (V, S) pairs solving T S + V S = 0.
//
// All linear algebra runs in a centered frame y = (z - mu)/alpha derived
// from the roots of Q_k; raw monomial coefficients at the original scale
// have too much dynamic range for the eigensolver and the |s_n| filter.
// Final coefficient refinement and root extraction run in double-double:
// the coefficient-to-root map of an eigenpolynomial is exponentially
// ill-conditioned in the degree, and plain double loses the roots of the
// harder pairs around degree 40.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lame/lame_operator.hpp"
#include "lame/poly.hpp"

namespace lame {

struct SpectralPair {
    int n = 0;
    Poly V;            // full Van Vleck, leading coefficient = leading_balance
    Poly S;            // monic of degree n
    double residual = 0.0;
    Poly normalized_V; // monic multiple of V

    // solver frame kept for accurate root extraction
    struct Frame {
        cx mu{};
        cx alpha{1.0};
        Poly s_scaled;
        Poly v_scaled;
    };
    std::optional<Frame> frame;
};

struct SpectrumReport {
    int n = 0;
    long expected_count = 0;
    std::vector<SpectralPair> pairs;
    std::vector<std::string> defect_notes;
    int found_count() const { return static_cast<int>(pairs.size()); }
};

// r = 0: the operator is triangular on the degree filtration.
SpectralPair solve_exact(const LameOperator& op, int n);

// r = 1: fix the forced leading coefficient a, absorb the free constant b
// as an eigenvalue of a single (n+1)x(n+1) matrix.
SpectrumReport solve_r1(const LameOperator& op, int n, std::uint64_t seed = 0x5eed);

// Newton iteration on the coefficient system with s_n = 1 and the leading
// V coefficient pinned; requires residual <= 1e-2 on entry.
SpectralPair newton_refine(const LameOperator& op, const SpectralPair& pair);

SpectrumReport enumerate_pairs(const LameOperator& op, int n,
                               std::uint64_t seed = 0x5eed);

// Per n, the pair whose normalized V has roots closest (optimal matching,
// max metric) to the target's roots.
std::vector<SpectralPair> select_sequence(const LameOperator& op, const Poly& target,
                                          const std::vector<int>& n_list,
                                          std::uint64_t seed = 0x5eed);

// Roots of S to near machine precision (double-double Aberth in the
// solver frame).
PointSet stieltjes_roots(const LameOperator& op, const SpectralPair& pair,
                         std::uint64_t seed = 0x5eed);

// Root vector of the degree-n eigenpolynomial of an exactly solvable
// operator. When the roots of Q_k are collinear on the real axis the nodes
// come from Newton on the root system seeded with Chebyshev points, which
// scales to large n; otherwise falls through to solve_exact + Aberth.
PointSet exactly_solvable_nodes(const LameOperator& op, int n,
                                std::uint64_t seed = 0x5eed);

long binomial(int n, int k);

} // namespace lame
