#include "lame/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lame/dd.hpp"
#include "lame/linalg.hpp"

namespace lame {

namespace {

using detail::dd;
using detail::ddc;

struct SolveFrame {
    cx mu{};
    cx alpha{1.0};
    LameOperator op;
};

SolveFrame make_frame(const LameOperator& op) {
    PointSet qroots = roots(op.leading());
    cx mu = std::accumulate(qroots.begin(), qroots.end(), cx{}) / double(qroots.size());
    double alpha = 0.0;
    for (cx r : qroots) alpha = std::max(alpha, std::abs(r - mu));
    if (alpha < 1e-12) alpha = 1.0;
    return {mu, cx{alpha}, op.rescaled(mu, cx{alpha})};
}

// columns of T restricted to monomials: col[j] = coefficients of T(z^j)
std::vector<std::vector<cx>> monomial_columns(const LameOperator& op, int n, int rows) {
    std::vector<std::vector<cx>> cols(n + 1);
    for (int j = 0; j <= n; ++j) {
        std::vector<cx> mono(j + 1, cx{});
        mono[j] = 1.0;
        Poly t = apply(op, Poly(mono));
        std::vector<cx> col(rows, cx{});
        for (int m = 0; m < rows; ++m) col[m] = t.coeff(m);
        cols[j] = std::move(col);
    }
    return cols;
}

double residual_of(const LameOperator& op, const Poly& s, const Poly& v) {
    Poly ts = apply(op, s);
    Poly vs = mul(v, s);
    Poly sum = add(ts, vs);
    double scale = std::max(ts.max_coeff_mag(), vs.max_coeff_mag());
    if (scale == 0.0) return 0.0;
    double num = 0.0;
    int top = std::max(ts.degree(), vs.degree());
    for (int i = 0; i <= top; ++i) num = std::max(num, std::abs(sum.coeff(i)));
    return num / scale;
}

// ---- double-double polynomial helpers (ascending coefficients) ----

std::vector<ddc> to_ddc(const Poly& p) {
    std::vector<ddc> out(p.coeffs().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = ddc(p.coeffs()[i]);
    return out;
}

std::vector<ddc> ddc_mul(const std::vector<ddc>& a, const std::vector<ddc>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<ddc> r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

void ddc_add_into(std::vector<ddc>& a, const std::vector<ddc>& b) {
    if (b.size() > a.size()) a.resize(b.size());
    for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

std::vector<ddc> ddc_der(const std::vector<ddc>& a) {
    if (a.size() <= 1) return {};
    std::vector<ddc> d(a.size() - 1);
    for (size_t i = 1; i < a.size(); ++i) d[i - 1] = a[i] * ddc(double(i));
    return d;
}

std::vector<ddc> ddc_apply(const std::vector<std::vector<ddc>>& qi,
                           const std::vector<ddc>& s) {
    std::vector<ddc> out;
    std::vector<ddc> d = s;
    for (size_t i = 0; i < qi.size(); ++i) {
        if (!qi[i].empty() && !d.empty()) ddc_add_into(out, ddc_mul(qi[i], d));
        d = ddc_der(d);
    }
    return out;
}

// Newton on the coefficient system in double-double. The Jacobian is built
// and factored in double (iterative-refinement style); the residual is
// evaluated in dd, which is what actually buys the extra digits.
struct DdRefineResult {
    std::vector<ddc> s;
    std::vector<ddc> v;
    double residual;
};

DdRefineResult dd_refine(const LameOperator& op, int n, int r,
                         const Poly& s0, const Poly& v0) {
    std::vector<std::vector<ddc>> qi(op.order() + 1);
    for (int i = 0; i <= op.order(); ++i) qi[i] = to_ddc(op.coeff(i));

    std::vector<ddc> s = to_ddc(s0);
    s.resize(n + 1);
    s[n] = ddc(1.0);
    std::vector<ddc> v = to_ddc(v0);
    v.resize(r + 1);

    const int rows = n + r; // coefficients 0 .. n+r-1

    // T columns never change; the V-product part of the Jacobian does
    std::vector<Poly> tcols(n);
    for (int j = 0; j < n; ++j) {
        std::vector<cx> mono(j + 1, cx{});
        mono[j] = 1.0;
        tcols[j] = apply(op, Poly(mono));
    }

    double best_res = 1e300;
    std::vector<ddc> best_s = s, best_v = v;
    bool jac_singular = false;
    for (int it = 0; it < 24; ++it) {
        std::vector<ddc> ts = ddc_apply(qi, s);
        std::vector<ddc> vs = ddc_mul(v, s);
        std::vector<ddc> f = ts;
        ddc_add_into(f, vs);
        f.resize(std::max<size_t>(f.size(), rows));

        double scale = 0.0;
        for (const ddc& c : ts) scale = std::max(scale, double(detail::abs(c)));
        for (const ddc& c : vs) scale = std::max(scale, double(detail::abs(c)));
        if (scale == 0.0) scale = 1.0;
        double resn = 0.0;
        for (int m = 0; m < rows; ++m) resn = std::max(resn, double(detail::abs(f[m])));
        resn /= scale;
        if (resn < best_res) {
            best_res = resn;
            best_s = s;
            best_v = v;
        }
        if (resn < 1e-27) break;

        // Jacobian at the current iterate, in double
        ComplexMatrix J(rows, rows);
        std::vector<cx> vc(v.size()), sc(s.size());
        for (size_t i = 0; i < v.size(); ++i) vc[i] = v[i].to_complex();
        for (size_t i = 0; i < s.size(); ++i) sc[i] = s[i].to_complex();
        Poly vpoly{std::vector<cx>(vc)};
        for (int j = 0; j < n; ++j) {
            std::vector<cx> mono(j + 1, cx{});
            mono[j] = 1.0;
            Poly col = add(tcols[j], mul(vpoly, Poly(mono)));
            for (int m = 0; m < rows; ++m) J(m, j) = col.coeff(m);
        }
        for (int i = 0; i < r; ++i)
            for (int m = 0; m < rows; ++m) {
                int idx = m - i;
                J(m, n + i) = (idx >= 0 && idx < int(sc.size())) ? sc[idx] : cx{};
            }

        std::vector<cx> rhs(rows);
        for (int m = 0; m < rows; ++m) rhs[m] = -f[m].to_complex();
        std::vector<cx> step;
        try {
            step = lu_solve(J, rhs);
        } catch (const SingularMatrixError&) {
            // defective or multiple spectral point; damp through it with a
            // regularized solve and keep going
            jac_singular = true;
            double nrm = J.norm_inf();
            for (int d = 0; d < rows; ++d) J(d, d) += 1e-12 * nrm;
            try {
                step = lu_solve(J, rhs);
            } catch (const SingularMatrixError&) {
                break;
            }
        }
        for (int j = 0; j < n; ++j) s[j] += ddc(step[j]);
        for (int i = 0; i < r; ++i) v[i] += ddc(step[n + i]);
    }
    if (best_res > 1e-8 && jac_singular)
        throw Error("newton_refine: defective/multiple spectral point");
    return {std::move(best_s), std::move(best_v), best_res};
}

// Aberth-Ehrlich in double-double. Input must be reasonably scaled.
std::vector<cx> dd_aberth(const std::vector<ddc>& q, const std::vector<cx>& init,
                          std::uint64_t seed) {
    const int n = static_cast<int>(q.size()) - 1;
    std::vector<ddc> d(n);
    for (int i = 1; i <= n; ++i) d[i - 1] = q[i] * ddc(double(i));

    auto horner = [](const std::vector<ddc>& c, ddc z) {
        ddc acc;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
        return acc;
    };

    std::vector<ddc> z(n);
    if (static_cast<int>(init.size()) == n) {
        for (int i = 0; i < n; ++i) z[i] = ddc(init[i]);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> jit(-0.3, 0.3);
        for (int i = 0; i < n; ++i) {
            double th = 2.0 * M_PI * (i + 0.5) / n + 0.31 + jit(rng) / n;
            z[i] = ddc(std::polar(1.2, th));
        }
    }

    for (int sweep = 0; sweep < 160; ++sweep) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            ddc pv = horner(q, z[i]);
            ddc dv = horner(d, z[i]);
            ddc N = (double(detail::abs(dv)) == 0.0) ? ddc(cx{0.1, 0.05}) : pv / dv;
            ddc S;
            for (int j = 0; j < n; ++j)
                if (j != i) S += ddc(1.0) / (z[i] - z[j]);
            ddc denom = ddc(1.0) - N * S;
            ddc step = (double(detail::abs(denom)) < 1e-300) ? N : N / denom;
            z[i] -= step;
            worst = std::max(worst, double(detail::abs(step)) /
                                        (1.0 + double(detail::abs(z[i]))));
        }
        if (worst < 1e-28) break;
    }
    std::vector<cx> out(n);
    for (int i = 0; i < n; ++i) out[i] = z[i].to_complex();
    return out;
}

SpectralPair assemble_pair(const SolveFrame& fr, int n,
                           const std::vector<ddc>& s_dd, const std::vector<ddc>& v_dd,
                           const LameOperator& orig_op) {
    std::vector<cx> sc(s_dd.size()), vc(v_dd.size());
    for (size_t i = 0; i < s_dd.size(); ++i) sc[i] = s_dd[i].to_complex();
    for (size_t i = 0; i < v_dd.size(); ++i) vc[i] = v_dd[i].to_complex();
    Poly s_scaled{std::vector<cx>(sc)};
    Poly v_scaled{std::vector<cx>(vc)};

    cx inv_alpha = 1.0 / fr.alpha;
    cx shift = -fr.mu * inv_alpha;
    cx apow = 1.0;
    for (int i = 0; i < n; ++i) apow *= fr.alpha;

    SpectralPair p;
    p.n = n;
    p.S = scale(compose_affine(s_scaled, shift, inv_alpha), apow);
    p.V = compose_affine(v_scaled, shift, inv_alpha);
    p.normalized_V = monic(p.V);
    p.residual = residual_of(orig_op, p.S, p.V);
    p.frame = SpectralPair::Frame{fr.mu, fr.alpha, s_scaled, v_scaled};
    return p;
}

std::vector<ddc> pair_scaled_s(const SolveFrame& fr, const SpectralPair& pair,
                               Poly& v_scaled_out) {
    if (pair.frame && std::abs(pair.frame->mu - fr.mu) < 1e-12 &&
        std::abs(pair.frame->alpha - fr.alpha) < 1e-12) {
        v_scaled_out = pair.frame->v_scaled;
        return to_ddc(pair.frame->s_scaled);
    }
    // fall back to a forward transform of the stored coefficients
    cx apow = 1.0;
    for (int i = 0; i < pair.n; ++i) apow *= fr.alpha;
    Poly s_scaled = scale(compose_affine(pair.S, fr.mu, fr.alpha), 1.0 / apow);
    v_scaled_out = compose_affine(pair.V, fr.mu, fr.alpha);
    return to_ddc(s_scaled);
}

} // namespace

long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

SpectralPair solve_exact(const LameOperator& op, int n) {
    Classification cls = validate(op);
    if (!cls.nondegenerate) throw Error("solve_exact: " + cls.note);
    if (cls.fuchs_index != 0) throw Error("solve_exact: Fuchs index must be 0");
    if (n < 0) throw Error("solve_exact: n must be >= 0");

    SolveFrame fr = make_frame(op);
    const LameOperator& sop = fr.op;

    // diagonal of the triangular action on monomials
    std::vector<cx> lambda(n + 1);
    for (int j = 0; j <= n; ++j) {
        cx l = sop.coeff(0).coeff(0);
        for (int i = 1; i <= sop.order(); ++i) {
            double ff = 1.0;
            for (int t = 0; t < i; ++t) ff *= double(j - t);
            l += sop.coeff(i).coeff(i) * ff;
        }
        lambda[j] = l;
    }
    for (int m = 0; m < n; ++m) {
        double scale = std::max({std::abs(lambda[m]), std::abs(lambda[n]), 1.0});
        if (std::abs(lambda[m] - lambda[n]) <= 1e-10 * scale)
            throw Error("solve_exact: resonant diagonal - eigenvector may not exist or "
                        "is not unique");
    }

    auto cols = monomial_columns(sop, n, n + 1);
    std::vector<cx> s(n + 1, cx{});
    s[n] = 1.0;
    for (int m = n - 1; m >= 0; --m) {
        cx acc = 0.0;
        for (int j = m + 1; j <= n; ++j) acc += cols[j][m] * s[j];
        s[m] = -acc / (lambda[m] - lambda[n]);
    }

    Poly s0{std::vector<cx>(s)};
    Poly v0 = Poly::constant(leading_balance(sop, n));
    DdRefineResult ref = dd_refine(sop, n, 0, s0, v0);
    return assemble_pair(fr, n, ref.s, ref.v, op);
}

SpectrumReport solve_r1(const LameOperator& op, int n, std::uint64_t seed) {
    Classification cls = validate(op);
    if (!cls.nondegenerate) throw Error("solve_r1: " + cls.note);
    if (cls.fuchs_index != 1) throw Error("solve_r1: Fuchs index must be 1");
    if (n < op.order()) throw Error("solve_r1: n must be >= k");

    SpectrumReport rep;
    rep.n = n;
    rep.expected_count = binomial(n + 1, n);

    SolveFrame fr = make_frame(op);
    const LameOperator& sop = fr.op;
    cx a = leading_balance(sop, n);

    auto cols = monomial_columns(sop, n, n + 2);
    ComplexMatrix A(n + 1, n + 1);
    for (int j = 0; j <= n; ++j) {
        for (int m = 0; m <= n; ++m) {
            cx v = cols[j][m];
            if (m == j + 1) v += a;
            A(m, j) = v;
        }
    }

    std::vector<cx> eig;
    try {
        eig = eigenvalues_dd(A);
    } catch (const QrError& e) {
        rep.defect_notes.push_back(std::string("eigensolver: ") + e.what() +
                                   " (partial spectrum)");
        eig = e.partial;
    }

    for (size_t idx = 0; idx < eig.size(); ++idx) {
        cx b_scaled = -eig[idx];
        std::vector<cx> vec;
        bool have_vec = false;
        for (int attempt = 0; attempt < 3 && !have_vec; ++attempt) {
            try {
                vec = eigenvector(A, eig[idx], mix_seed(seed, idx * 7 + attempt));
                have_vec = true;
            } catch (const Error&) {
            }
        }
        if (!have_vec) {
            rep.defect_notes.push_back(
                "inverse iteration failed for eigenvalue index " + std::to_string(idx) +
                " (defective or tightly clustered)");
            continue;
        }
        double vmax = 0.0;
        for (const cx& c : vec) vmax = std::max(vmax, std::abs(c));
        if (std::abs(vec[n]) < 1e-8 * vmax) {
            rep.defect_notes.push_back(
                "candidate with s_n ~ 0 rejected at eigenvalue index " +
                std::to_string(idx));
            continue;
        }
        cx inv = 1.0 / vec[n];
        for (cx& c : vec) c *= inv;

        Poly s0{std::vector<cx>(vec)};
        Poly v0{std::vector<cx>{b_scaled, a}};
        try {
            DdRefineResult ref = dd_refine(sop, n, 1, s0, v0);
            if (ref.residual > 1e-8) {
                rep.defect_notes.push_back(
                    "refinement stalled at residual " + std::to_string(ref.residual) +
                    " for eigenvalue index " + std::to_string(idx));
                continue;
            }
            rep.pairs.push_back(assemble_pair(fr, n, ref.s, ref.v, op));
        } catch (const Error& e) {
            rep.defect_notes.push_back(std::string(e.what()) + " at eigenvalue index " +
                                       std::to_string(idx));
        }
    }

    // duplicate detection (clustered Van Vlecks refining into the same pair)
    std::sort(rep.pairs.begin(), rep.pairs.end(),
              [](const SpectralPair& x, const SpectralPair& y) {
                  cx bx = x.V.coeff(0), by = y.V.coeff(0);
                  if (bx.real() != by.real()) return bx.real() < by.real();
                  return bx.imag() < by.imag();
              });
    double bscale = 0.0;
    for (const auto& p : rep.pairs) bscale = std::max(bscale, std::abs(p.V.coeff(0)));
    for (size_t i = 0; i + 1 < rep.pairs.size(); ++i) {
        if (std::abs(rep.pairs[i].V.coeff(0) - rep.pairs[i + 1].V.coeff(0)) <
            1e-9 * std::max(1.0, bscale)) {
            rep.defect_notes.push_back("clustered Van Vleck constants near index " +
                                       std::to_string(i) +
                                       " (multiplicity not resolved)");
        }
    }

    // clustered eigenvalue report (radius 1e-6 relative)
    std::vector<cx> be = eig;
    std::sort(be.begin(), be.end(), [](cx x, cx y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    double escale = 0.0;
    for (cx e : be) escale = std::max(escale, std::abs(e));
    for (size_t i = 0; i + 1 < be.size(); ++i)
        if (std::abs(be[i] - be[i + 1]) < 1e-6 * std::max(1.0, escale))
            rep.defect_notes.push_back("eigenvalue cluster at sorted index " +
                                       std::to_string(i));
    return rep;
}

SpectralPair newton_refine(const LameOperator& op, const SpectralPair& pair) {
    if (pair.residual > 1e-2)
        throw Error("newton_refine: residual too large for the Newton basin");
    const int r = std::max(op.fuchs_index(), pair.V.degree());
    SolveFrame fr = make_frame(op);
    Poly v_scaled;
    std::vector<ddc> s_dd = pair_scaled_s(fr, pair, v_scaled);
    std::vector<cx> sc(s_dd.size());
    for (size_t i = 0; i < sc.size(); ++i) sc[i] = s_dd[i].to_complex();
    DdRefineResult ref = dd_refine(fr.op, pair.n, r, Poly{std::move(sc)}, v_scaled);
    return assemble_pair(fr, pair.n, ref.s, ref.v, op);
}

SpectrumReport enumerate_pairs(const LameOperator& op, int n, std::uint64_t seed) {
    Classification cls = validate(op);
    if (!cls.nondegenerate) throw Error("enumerate: " + cls.note);
    if (cls.fuchs_index == 0) {
        SpectrumReport rep;
        rep.n = n;
        rep.expected_count = 1;
        rep.pairs.push_back(solve_exact(op, n));
        return rep;
    }
    if (cls.fuchs_index == 1) return solve_r1(op, n, seed);
    throw Error("enumeration unsupported for r >= 2; use newton_refine with external "
                "guesses");
}

namespace {
double match_max_distance(PointSet a, PointSet b) {
    // optimal assignment under the max metric; r is tiny, so permutations
    if (a.size() != b.size()) return 1e300;
    std::vector<int> idx(b.size());
    std::iota(idx.begin(), idx.end(), 0);
    double best = 1e300;
    do {
        double worst = 0.0;
        for (size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[idx[i]]));
        best = std::min(best, worst);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}
} // namespace

std::vector<SpectralPair> select_sequence(const LameOperator& op, const Poly& target,
                                          const std::vector<int>& n_list,
                                          std::uint64_t seed) {
    PointSet target_roots = roots(target);
    std::vector<SpectralPair> out;
    for (int n : n_list) {
        SpectrumReport rep = enumerate_pairs(op, n, mix_seed(seed, n));
        if (rep.pairs.empty())
            throw Error("select_sequence: empty spectrum at n = " + std::to_string(n));
        double best = 1e300;
        const SpectralPair* pick = nullptr;
        for (const auto& p : rep.pairs) {
            PointSet vr = roots(p.normalized_V);
            double d = match_max_distance(target_roots, vr);
            if (d < best) {
                best = d;
                pick = &p;
            }
        }
        out.push_back(*pick);
    }
    return out;
}

PointSet stieltjes_roots(const LameOperator& op, const SpectralPair& pair,
                         std::uint64_t seed) {
    if (pair.n == 0) return {};
    if (pair.n == 1) {
        Poly s = pair.S;
        return {-s.coeff(0) / s.coeff(1)};
    }
    SolveFrame fr = make_frame(op);
    Poly v_scaled;
    std::vector<ddc> s_dd = pair_scaled_s(fr, pair, v_scaled);
    {
        // re-converge in dd so the coefficients carry sub-double information
        std::vector<cx> sc(s_dd.size());
        for (size_t i = 0; i < sc.size(); ++i) sc[i] = s_dd[i].to_complex();
        const int r = std::max(op.fuchs_index(), pair.V.degree());
        DdRefineResult ref = dd_refine(fr.op, pair.n, r, Poly{std::move(sc)}, v_scaled);
        s_dd = ref.s;
    }

    // warm start from a double-precision Aberth pass
    std::vector<cx> warm;
    {
        std::vector<cx> sc(s_dd.size());
        for (size_t i = 0; i < sc.size(); ++i) sc[i] = s_dd[i].to_complex();
        try {
            warm = roots(Poly{std::move(sc)}, mix_seed(seed, 11));
        } catch (const RootsError& e) {
            warm = e.best;
        }
    }
    std::vector<cx> scaled_roots = dd_aberth(s_dd, warm, mix_seed(seed, 17));
    PointSet out(scaled_roots.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = fr.mu + fr.alpha * scaled_roots[i];
    sort_points(out);
    return out;
}

namespace {

// Newton identities: e_0..e_t from power sums p_1..p_t
void elem_from_power(const std::vector<cx>& p, int t, std::vector<cx>& e) {
    e.assign(t + 1, cx{});
    e[0] = 1.0;
    for (int m = 1; m <= t; ++m) {
        cx s = 0.0;
        double sign = 1.0;
        for (int i = 1; i <= m; ++i) {
            s += sign * e[m - i] * p[i];
            sign = -sign;
        }
        e[m] = s / double(m);
    }
}

// Root system for eigenpolynomial roots: at every root x_j of S,
//   sum_{i=1..k} Q_i(x_j) * S^(i)(x_j)/S'(x_j) = 0,
// with S^(i)/S' expressed through elementary symmetric functions of
// w_l = 1/(x_j - x_l), l != j.
struct RootSystem {
    const LameOperator& op;
    int k;

    std::vector<cx> F(const std::vector<cx>& x) const {
        const int n = static_cast<int>(x.size());
        std::vector<cx> f(n), p(k, cx{}), e;
        for (int j = 0; j < n; ++j) {
            for (int m = 1; m < k; ++m) p[m] = 0.0;
            for (int l = 0; l < n; ++l) {
                if (l == j) continue;
                cx wl = 1.0 / (x[j] - x[l]);
                cx acc = wl;
                for (int m = 1; m < k; ++m) {
                    p[m] += acc;
                    acc *= wl;
                }
            }
            elem_from_power(p, k - 1, e);
            cx val = 0.0;
            double fact = 1.0;
            for (int i = 1; i <= k; ++i) {
                fact *= double(i);
                val += eval(op.coeff(i), x[j]) * fact * e[i - 1];
            }
            f[j] = val;
        }
        return f;
    }

    ComplexMatrix J(const std::vector<cx>& x) const {
        const int n = static_cast<int>(x.size());
        ComplexMatrix jac(n, n);
        std::vector<cx> p(k, cx{}), e, em(k, cx{});
        std::vector<cx> w(n);
        std::vector<Poly> qd(k + 1);
        for (int i = 1; i <= k; ++i) qd[i] = derivative(op.coeff(i));

        for (int j = 0; j < n; ++j) {
            for (int m = 1; m < k; ++m) p[m] = 0.0;
            for (int l = 0; l < n; ++l) {
                if (l == j) continue;
                cx wl = 1.0 / (x[j] - x[l]);
                w[l] = wl;
                cx acc = wl;
                for (int m = 1; m < k; ++m) {
                    p[m] += acc;
                    acc *= wl;
                }
            }
            elem_from_power(p, k - 1, e);

            cx diag = 0.0;
            double fact = 1.0;
            for (int i = 1; i <= k; ++i) {
                fact *= double(i);
                diag += eval(qd[i], x[j]) * fact * e[i - 1];
            }
            for (int l = 0; l < n; ++l) {
                if (l == j) continue;
                // leave-one-out elementaries e_t^{(j,l)}
                em[0] = 1.0;
                for (int t = 1; t < k; ++t) em[t] = e[t] - w[l] * em[t - 1];
                cx offd = 0.0;
                cx dd_ = 0.0;
                double f2 = 1.0;
                for (int i = 1; i <= k; ++i) {
                    f2 *= double(i);
                    if (i >= 2) {
                        cx qv = eval(op.coeff(i), x[j]) * f2 * em[i - 2] * w[l] * w[l];
                        offd += qv;
                        dd_ += qv;
                    }
                }
                jac(j, l) = offd;
                diag -= dd_;
            }
            jac(j, j) = diag;
        }
        return jac;
    }
};

} // namespace

PointSet exactly_solvable_nodes(const LameOperator& op, int n, std::uint64_t seed) {
    Classification cls = validate(op);
    if (!cls.nondegenerate || cls.fuchs_index != 0)
        throw Error("exactly_solvable_nodes: exactly solvable operator required");
    if (n < 1) return {};

    PointSet qroots = roots(op.leading());
    bool real_segment = true;
    double lo = 1e300, hi = -1e300;
    for (cx r : qroots) {
        if (std::abs(r.imag()) > 1e-9) real_segment = false;
        lo = std::min(lo, r.real());
        hi = std::max(hi, r.real());
    }

    if (!real_segment || n < 8) {
        SpectralPair pair = solve_exact(op, n);
        return stieltjes_roots(op, pair, seed);
    }

    // Chebyshev seed on [lo, hi], Newton on the root system
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    std::vector<cx> x(n);
    for (int j = 0; j < n; ++j)
        x[j] = mid - half * std::cos(M_PI * (j + 0.5) / n);

    RootSystem sys{op, op.order()};
    for (int it = 0; it < 60; ++it) {
        std::vector<cx> f = sys.F(x);
        double fn = 0.0;
        for (const cx& c : f) fn = std::max(fn, std::abs(c));
        ComplexMatrix jac = sys.J(x);
        std::vector<cx> rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = -f[i];
        std::vector<cx> step;
        try {
            step = lu_solve(jac, rhs);
        } catch (const SingularMatrixError&) {
            break;
        }
        // per-root damping against collisions
        for (int j = 0; j < n; ++j) {
            double sep = 1e300;
            for (int l = 0; l < n; ++l)
                if (l != j) sep = std::min(sep, std::abs(x[l] - x[j]));
            double m = std::abs(step[j]);
            if (m > 0.4 * sep) step[j] *= 0.4 * sep / m;
        }
        double sn = 0.0;
        for (int j = 0; j < n; ++j) {
            x[j] += step[j];
            sn = std::max(sn, std::abs(step[j]));
        }
        if (sn < 1e-15 * std::max(1.0, std::abs(hi))) break;
    }
    PointSet out(x.begin(), x.end());
    sort_points(out);
    return out;
}

} // namespace lame
