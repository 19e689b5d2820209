#pragma once

// Higher Lame operators T = sum_{i=1..k} Q_i(z) d^i/dz^i, optionally with an
// order-zero term Q_0 that the spectral solvers treat as a fixed part of the
// Van Vleck polynomial.

#include <optional>
#include <string>
#include <vector>

#include "lame/poly.hpp"

namespace lame {

struct Classification {
    int fuchs_index = 0;
    bool is_lame = false;         // fuchs index >= 0
    bool nondegenerate = false;   // deg Q_k == k + r
    bool exactly_solvable = false; // r == 0
    std::string note;
};

class LameOperator {
public:
    // coeffs[i] multiplies d^i/dz^i, i = 0..k. Q_k must be nonzero and a
    // nonzero Q_0 must have degree <= fuchs index.
    static LameOperator make(int k, std::vector<Poly> coeffs);

    // Leibniz expansion of S -> (Q S)^(k); requires deg Q >= k.
    static LameOperator from_composition(int k, const Poly& q);

    int order() const { return k_; }
    int fuchs_index() const { return r_; }
    const Poly& coeff(int i) const { return q_[i]; }
    const std::vector<Poly>& coeffs() const { return q_; }
    const Poly& leading() const { return q_[k_]; }
    bool nondegenerate() const { return r_ >= 0 && q_[k_].degree() == k_ + r_; }

    // the operator in the frame z = mu + alpha*y
    LameOperator rescaled(cx mu, cx alpha) const;

private:
    LameOperator(int k, std::vector<Poly> q, int r)
        : k_(k), q_(std::move(q)), r_(r) {}
    int k_;
    std::vector<Poly> q_;
    int r_;
};

Classification validate(const LameOperator& op);

// sum_{i=0..k} Q_i s^(i)
Poly apply(const LameOperator& op, const Poly& s);

// Forced leading coefficient of any degree-r Van Vleck paired with a
// degree-n eigenpolynomial: the z^{n+r} coefficient of T z^n + V z^n must
// cancel. Errors on degenerate operators.
cx leading_balance(const LameOperator& op, int n);

} // namespace lame
