#include "lame/lame_operator.hpp"

#include <climits>
#include <cmath>

namespace lame {

namespace {
int fuchs_of(int k, const std::vector<Poly>& q) {
    int r = INT_MIN;
    for (int i = 1; i <= k; ++i)
        if (!q[i].is_zero()) r = std::max(r, q[i].degree() - i);
    return r;
}
} // namespace

LameOperator LameOperator::make(int k, std::vector<Poly> coeffs) {
    if (k < 1) throw Error("operator: order must be >= 1");
    coeffs.resize(k + 1);
    if (coeffs[k].is_zero()) throw Error("operator: leading coefficient Q_k is zero");
    int r = fuchs_of(k, coeffs);
    if (!coeffs[0].is_zero() && coeffs[0].degree() > std::max(r, 0))
        throw Error("operator: deg Q_0 exceeds the Fuchs index; cannot absorb into V");
    return LameOperator(k, std::move(coeffs), r);
}

LameOperator LameOperator::from_composition(int k, const Poly& q) {
    if (q.degree() < k)
        throw Error("from_composition: deg Q must be >= k");
    std::vector<Poly> coeffs(k + 1);
    // (Q S)^(k) = sum_i C(k,i) Q^(k-i) S^(i)
    std::vector<Poly> ders{q};
    for (int i = 0; i < k; ++i) ders.push_back(derivative(ders.back()));
    double binom = 1.0;
    for (int i = 0; i <= k; ++i) {
        coeffs[i] = scale(ders[k - i], binom);
        binom = binom * double(k - i) / double(i + 1);
    }
    return make(k, std::move(coeffs));
}

LameOperator LameOperator::rescaled(cx mu, cx alpha) const {
    std::vector<Poly> coeffs(k_ + 1);
    cx apow = 1.0;
    for (int i = 0; i <= k_; ++i) {
        coeffs[i] = scale(compose_affine(q_[i], mu, alpha), 1.0 / apow);
        apow *= alpha;
    }
    return make(k_, std::move(coeffs));
}

Classification validate(const LameOperator& op) {
    Classification c;
    c.fuchs_index = op.fuchs_index();
    c.is_lame = c.fuchs_index >= 0;
    c.nondegenerate = op.nondegenerate();
    c.exactly_solvable = c.is_lame && c.fuchs_index == 0;
    if (!c.is_lame)
        c.note = "not a higher Lame operator (negative Fuchs index)";
    else if (!c.nondegenerate)
        c.note = "degenerate: deg Q_k < k + r; enumeration refuses such operators";
    return c;
}

Poly apply(const LameOperator& op, const Poly& s) {
    Poly out;
    Poly d = s;
    for (int i = 0; i <= op.order(); ++i) {
        if (!op.coeff(i).is_zero() && !d.is_zero()) out = add(out, mul(op.coeff(i), d));
        d = derivative(d);
    }
    return out;
}

cx leading_balance(const LameOperator& op, int n) {
    if (!op.nondegenerate())
        throw Error("leading_balance: degenerate operator");
    const int r = op.fuchs_index();
    cx a = 0.0;
    for (int i = 1; i <= op.order(); ++i) {
        const Poly& qi = op.coeff(i);
        if (qi.degree() == i + r) {
            double ff = 1.0;
            for (int t = 0; t < i; ++t) ff *= double(n - t);
            a += qi.coeff(i + r) * ff;
        }
    }
    a += op.coeff(0).coeff(r);
    return -a;
}

} // namespace lame
