#include "lame/forest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace lame {

namespace {

double seg_dist(cx p, cx a, cx b, cx* closest = nullptr, double* t_out = nullptr) {
    cx e = b - a;
    double len2 = std::norm(e);
    double t = len2 == 0.0 ? 0.0
                           : std::clamp(((p - a).real() * e.real() +
                                         (p - a).imag() * e.imag()) /
                                            len2,
                                        0.0, 1.0);
    cx q = a + t * e;
    if (closest) *closest = q;
    if (t_out) *t_out = t;
    return std::abs(p - q);
}

bool segments_cross(cx a, cx b, cx c, cx d) {
    auto orient = [](cx p, cx q, cx r) {
        double v = (q.real() - p.real()) * (r.imag() - p.imag()) -
                   (q.imag() - p.imag()) * (r.real() - p.real());
        return (v > 0) - (v < 0);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4;
}

double polyline_length(const std::vector<cx>& pl) {
    double L = 0.0;
    for (size_t i = 1; i < pl.size(); ++i) L += std::abs(pl[i] - pl[i - 1]);
    return L;
}

void polyline_at(const std::vector<cx>& pl, double s, cx& z, cx& tangent) {
    double acc = 0.0;
    for (size_t i = 1; i < pl.size(); ++i) {
        double seg = std::abs(pl[i] - pl[i - 1]);
        if (acc + seg >= s || i + 1 == pl.size()) {
            double t = seg == 0.0 ? 0.0 : std::clamp((s - acc) / seg, 0.0, 1.0);
            z = pl[i - 1] + t * (pl[i] - pl[i - 1]);
            tangent = seg == 0.0 ? cx{1.0} : (pl[i] - pl[i - 1]) / seg;
            return;
        }
        acc += seg;
    }
    z = pl.back();
    tangent = cx{1.0};
}

// synthetic division of ascending coefficients by (z - r)
std::vector<cx> deflate(const std::vector<cx>& q, cx r) {
    std::vector<cx> out(q.size() - 1);
    cx carry = q.back();
    for (int j = int(q.size()) - 2; j >= 0; --j) {
        out[j] = carry;
        carry = q[j] + carry * r;
    }
    return out;
}

void recompute_components(SupportForest& f) {
    const size_t nv = f.vertices.size();
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<int> skel_degree(nv, 0);
    for (const auto& e : f.edges) {
        if (e.exceptional) continue;
        skel_degree[e.a]++;
        skel_degree[e.b]++;
        parent[find(e.a)] = find(e.b);
    }
    std::map<int, int> comp_id;
    f.components.clear();
    for (size_t i = 0; i < nv; ++i) {
        bool in_skeleton = skel_degree[i] > 0 || f.vertices[i].kind == VertexKind::Atom;
        if (!in_skeleton) continue;
        int root = find(int(i));
        auto it = comp_id.find(root);
        if (it == comp_id.end()) {
            it = comp_id.emplace(root, int(f.components.size())).first;
            f.components.push_back({});
        }
        ComponentCensus& c = f.components[it->second];
        c.vertices.push_back(int(i));
        const auto& v = f.vertices[i];
        if (v.kind == VertexKind::QZero || v.kind == VertexKind::Atom)
            c.q_roots += v.multiplicity;
        if (v.kind == VertexKind::VZero) c.v_roots += v.multiplicity;
    }
}

} // namespace

double ForestEdge::length() const { return polyline_length(polyline); }

double SupportForest::dist_to_edges(cx z, int* edge, cx* closest) const {
    double best = 1e300;
    for (size_t e = 0; e < edges.size(); ++e) {
        const auto& pl = edges[e].polyline;
        for (size_t i = 1; i < pl.size(); ++i) {
            cx q;
            double d = seg_dist(z, pl[i - 1], pl[i], &q);
            if (d < best) {
                best = d;
                if (edge) *edge = static_cast<int>(e);
                if (closest) *closest = q;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------- branch

double AlgebraicBranch::root_clearance(cx z) const {
    double d = 1e300;
    for (cx r : vroots) d = std::min(d, std::abs(z - r));
    for (cx r : qroots) d = std::min(d, std::abs(z - r));
    return d;
}

std::vector<cx> AlgebraicBranch::root_candidates(cx z) const {
    cx f = eval(vt, z) / eval(qt, z);
    double r = std::pow(std::abs(f), 1.0 / k);
    double th = std::arg(f);
    std::vector<cx> cands(k);
    for (int j = 0; j < k; ++j)
        cands[j] = std::polar(r, (th + 2.0 * M_PI * j) / k);
    return cands;
}

AlgebraicBranch make_branch(const Poly& vt, const Poly& qt, int k) {
    if (k < 1) throw Error("make_branch: k must be >= 1");
    AlgebraicBranch b;
    b.vt = vt.is_zero() ? Poly::constant(1.0) : monic(vt);
    b.qt = monic(qt);
    if (b.qt.degree() - b.vt.degree() != k)
        throw Error("make_branch: deg Qt - deg Vt must equal k for 1/z asymptotics");
    b.k = k;
    b.vroots = b.vt.degree() >= 1 ? roots(b.vt) : PointSet{};
    b.qroots = roots(b.qt);
    for (cx v : b.vroots)
        for (cx q : b.qroots)
            if (std::abs(v - q) < 1e-8)
                throw Error("make_branch: Vt and Qt share a root to working precision");

    double rmax = 0.0;
    for (cx r : b.vroots) rmax = std::max(rmax, std::abs(r));
    for (cx r : b.qroots) rmax = std::max(rmax, std::abs(r));
    double ra = 2.0 * rmax + 2.0;
    double best = -1.0;
    for (int i = 0; i < 16; ++i) {
        cx cand = std::polar(ra, 2.0 * M_PI * i / 16.0 + 0.05);
        double c = b.root_clearance(cand);
        if (c > best) {
            best = c;
            b.anchor_z = cand;
        }
    }
    cx target = 1.0 / b.anchor_z;
    auto cands = b.root_candidates(b.anchor_z);
    b.anchor_w = cands[0];
    for (cx c : cands)
        if (std::abs(c - target) < std::abs(b.anchor_w - target)) b.anchor_w = c;
    return b;
}

BranchState branch_start(const AlgebraicBranch& b) { return {b.anchor_z, b.anchor_w}; }

BranchState branch_continue(const AlgebraicBranch& b, BranchState s, cx z1) {
    cx z0 = s.z;
    double total = std::abs(z1 - z0);
    if (total == 0.0) return s;
    double t = 0.0;
    int guard = 0;
    while (t < 1.0) {
        if (++guard > 2000000)
            throw PathError("branch_continue: step collapse", -1);
        cx zc = z0 + t * (z1 - z0);
        double clr = b.root_clearance(zc);
        if (clr < 1e-6)
            throw PathError("branch_continue: path within 1e-6 of a branch point", -1);
        double dt = std::min(1.0 - t, 0.45 * clr / total);
        if (dt <= 0.0) dt = 1.0 - t;
        for (;;) {
            cx zn = z0 + (t + dt) * (z1 - z0);
            auto cands = b.root_candidates(zn);
            cx wbest = cands[0];
            for (cx c : cands)
                if (std::abs(c - s.w) < std::abs(wbest - s.w)) wbest = c;
            if (std::abs(wbest - s.w) <= 0.4 * std::abs(s.w) || dt < 1e-12) {
                s.z = zn;
                s.w = wbest;
                t += dt;
                break;
            }
            dt *= 0.5;
        }
    }
    return s;
}

cx branch_eval(const AlgebraicBranch& b, const std::vector<cx>& path) {
    if (path.empty()) throw Error("branch_eval: empty path");
    BranchState s = branch_start(b);
    for (size_t i = 0; i < path.size(); ++i) {
        if (i == 0 && std::abs(path[0] - b.anchor_z) < 1e-12) continue;
        try {
            s = branch_continue(b, s, path[i]);
        } catch (const PathError& e) {
            throw PathError(e.what(), static_cast<int>(i) - 1);
        }
    }
    cx f = eval(b.vt, s.z) / eval(b.qt, s.z);
    cx wk = 1.0;
    for (int i = 0; i < b.k; ++i) wk *= s.w;
    if (std::abs(wk - f) > 1e-9 * std::max(1.0, std::abs(f)))
        throw Error("branch_eval: continuation lost the sheet");
    return s.w;
}

BranchState psi_step(const AlgebraicBranch& b, BranchState s, cx z1, cx& psi_acc) {
    double total = std::abs(z1 - s.z);
    if (total == 0.0) return s;
    cx prev_estimate{};
    for (int level = 2;; level *= 2) {
        BranchState cur = s;
        std::vector<cx> zs{s.z};
        std::vector<cx> ws{s.w};
        for (int i = 1; i <= level; ++i) {
            cx zt = s.z + (z1 - s.z) * (double(i) / level);
            cur = branch_continue(b, cur, zt);
            zs.push_back(cur.z);
            ws.push_back(cur.w);
        }
        cx integral{};
        for (int i = 0; i + 2 <= level; i += 2) {
            cx h = zs[i + 2] - zs[i];
            integral += h / 6.0 * (ws[i] + 4.0 * ws[i + 1] + ws[i + 2]);
        }
        if (level >= 4 &&
            std::abs(integral - prev_estimate) <= 1e-10 * std::max(1.0, total)) {
            psi_acc += integral;
            return cur;
        }
        prev_estimate = integral;
        if (level > 4096) { // refinement cap
            psi_acc += integral;
            return cur;
        }
    }
}

cx psi(const AlgebraicBranch& b, const std::vector<cx>& path) {
    if (path.size() < 2) throw Error("psi: path needs at least two points");
    BranchState s = branch_start(b);
    if (std::abs(path[0] - b.anchor_z) > 1e-12) s = branch_continue(b, s, path[0]);
    cx acc{};
    for (size_t i = 1; i < path.size(); ++i) s = psi_step(b, s, path[i], acc);
    return acc;
}

// ---------------------------------------------------------------- tracing

Trajectory trace_trajectory(const AlgebraicBranch& b, cx start, cx direction,
                            const TraceParams& params) {
    Trajectory tr;
    if (b.root_clearance(start) < 1e-6)
        throw Error("trace_trajectory: start too close to a root");
    direction /= std::abs(direction);

    BranchState s = branch_continue(b, branch_start(b), start);
    // Two marchable families: Im(psi) constant (w dz real) and Re(psi)
    // constant (w dz imaginary, the support-type curves). The seed picks
    // the family; oblique seeds are rejected.
    cx wd = s.w * direction;
    cx phase;
    if (std::abs(std::imag(wd)) <= 0.5 * std::abs(s.w))
        phase = cx{1.0, 0.0};
    else if (std::abs(std::real(wd)) <= 0.5 * std::abs(s.w))
        phase = cx{0.0, 1.0};
    else
        throw Error("trace_trajectory: direction seeds neither trajectory family");

    PointSet box_pts = b.vroots;
    box_pts.insert(box_pts.end(), b.qroots.begin(), b.qroots.end());
    PointSet box = convex_hull(box_pts);

    // dz/ds = u * phase * conj(w)/|w| keeps Im(psi / phase) constant
    double u = 1.0;
    if (std::real(phase * std::conj(s.w) / std::abs(s.w) * std::conj(direction)) < 0)
        u = -1.0;
    auto rhs = [&](const BranchState& st) {
        return u * phase * std::conj(st.w) / std::abs(st.w);
    };
    auto advance = [&](BranchState st, double h) {
        cx k1 = rhs(st);
        BranchState s2 = branch_continue(b, st, st.z + 0.5 * h * k1);
        cx k2 = rhs(s2);
        BranchState s3 = branch_continue(b, st, st.z + 0.5 * h * k2);
        cx k3 = rhs(s3);
        BranchState s4 = branch_continue(b, st, st.z + h * k3);
        cx k4 = rhs(s4);
        cx znew = st.z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return branch_continue(b, st, znew);
    };

    tr.points.push_back(s.z);
    double h = std::min(0.05, 0.2 * b.root_clearance(s.z));
    std::vector<cx> rec_samples{s.z};
    double rec_gap = std::max(4.0 * params.hit_tol, 0.05);
    double since_rec = 0.0;

    int guard = 0;
    while (true) {
        if (++guard > 400000) {
            tr.stop = TraceStop::MaxLength;
            break;
        }
        double clr = b.root_clearance(s.z);
        if (clr <= params.root_disk) {
            tr.stop = TraceStop::RootDisk;
            double best = 1e300;
            for (cx r : b.vroots)
                if (std::abs(s.z - r) < best) {
                    best = std::abs(s.z - r);
                    tr.stop_at = r;
                }
            for (cx r : b.qroots)
                if (std::abs(s.z - r) < best) {
                    best = std::abs(s.z - r);
                    tr.stop_at = r;
                }
            break;
        }
        if (dist_to_hull(s.z, box) > params.box_margin) {
            tr.stop = TraceStop::Box;
            break;
        }
        if (tr.length > params.max_length) {
            tr.stop = TraceStop::MaxLength;
            break;
        }
        if (params.obstacles) {
            int e = -1;
            cx closest;
            if (params.obstacles->dist_to_edges(s.z, &e, &closest) <= params.hit_tol &&
                tr.length > 4.0 * params.hit_tol) {
                tr.stop = TraceStop::Obstacle;
                tr.stop_at = closest;
                tr.hit_edge = e;
                break;
            }
        }
        if (since_rec >= rec_gap) {
            rec_samples.push_back(s.z);
            since_rec = 0.0;
        }
        bool recurred = false;
        for (size_t i = 0; i + 8 < rec_samples.size(); ++i)
            if (std::abs(s.z - rec_samples[i]) < 0.5 * rec_gap) recurred = true;
        if (recurred) {
            tr.stop = TraceStop::Recurrence;
            break;
        }

        h = std::min(h, 0.35 * clr);
        if (h < 1e-13) {
            tr.stop = TraceStop::StepCollapse;
            break;
        }
        BranchState full, half;
        try {
            full = advance(s, h);
            half = advance(advance(s, 0.5 * h), 0.5 * h);
        } catch (const PathError&) {
            h *= 0.5;
            continue;
        }
        double err = std::abs(full.z - half.z);
        double tol = params.local_tol * std::max(1.0, h);
        if (err > tol && h > 1e-12) {
            h *= 0.5;
            continue;
        }
        tr.length += std::abs(half.z - s.z);
        since_rec += std::abs(half.z - s.z);
        s = half;
        tr.points.push_back(s.z);
        if (err < 0.1 * tol) h *= 1.7;
        h = std::min(h, 0.1);
    }
    return tr;
}

// ---------------------------------------------------------------- build

namespace {

void douglas_peucker(const std::vector<cx>& pts, size_t i0, size_t i1, double tol,
                     std::vector<bool>& keep) {
    if (i1 <= i0 + 1) return;
    double worst = -1.0;
    size_t split = i0;
    for (size_t i = i0 + 1; i < i1; ++i) {
        double d = seg_dist(pts[i], pts[i0], pts[i1]);
        if (d > worst) {
            worst = d;
            split = i;
        }
    }
    if (worst > tol) {
        keep[split] = true;
        douglas_peucker(pts, i0, split, tol, keep);
        douglas_peucker(pts, split, i1, tol, keep);
    }
}

std::vector<cx> simplify_polyline(const std::vector<cx>& pts, double tol) {
    if (pts.size() <= 2) return pts;
    std::vector<bool> keep(pts.size(), false);
    keep.front() = keep.back() = true;
    douglas_peucker(pts, 0, pts.size() - 1, tol, keep);
    std::vector<cx> out;
    for (size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) out.push_back(pts[i]);
    return out;
}

} // namespace

SupportForest build_from_roots(const PointSet& pts, const BuildParams& params,
                               const PointSet& vroots, const PointSet& qroots, int k) {
    if (pts.size() < 20)
        throw Error("build_from_roots: at least 20 points required");

    SupportForest f;
    auto vclusters = cluster_points(vroots, params.atom_cluster);
    auto qclusters = cluster_points(qroots, params.atom_cluster);

    // points huddled at a multiplicity-k root of Q belong to an atom, not
    // to the curve skeleton
    std::vector<cx> work;
    std::vector<cx> atom_centers;
    for (const auto& [c, mult] : qclusters)
        if (mult == k) atom_centers.push_back(c);
    for (cx p : pts) {
        bool absorbed = false;
        for (cx c : atom_centers)
            if (std::abs(p - c) <= params.snap) {
                absorbed = true;
                break;
            }
        if (!absorbed) work.push_back(p);
    }

    const int n = static_cast<int>(work.size());
    std::vector<std::pair<int, int>> mst;
    if (n >= 2) {
        std::vector<double> dist(n, 1e300);
        std::vector<int> par(n, 0);
        std::vector<bool> used(n, false);
        used[0] = true;
        for (int j = 1; j < n; ++j) dist[j] = std::abs(work[j] - work[0]);
        for (int it = 1; it < n; ++it) {
            int best = -1;
            for (int j = 0; j < n; ++j)
                if (!used[j] && (best < 0 || dist[j] < dist[best])) best = j;
            mst.emplace_back(par[best], best);
            used[best] = true;
            for (int j = 0; j < n; ++j)
                if (!used[j]) {
                    double d = std::abs(work[j] - work[best]);
                    if (d < dist[j]) {
                        dist[j] = d;
                        par[j] = best;
                    }
                }
        }
    }

    std::vector<double> lens(mst.size());
    for (size_t i = 0; i < mst.size(); ++i)
        lens[i] = std::abs(work[mst[i].first] - work[mst[i].second]);
    std::vector<double> sorted_lens = lens;
    std::sort(sorted_lens.begin(), sorted_lens.end());
    double global_median =
        sorted_lens.empty() ? 0.0 : sorted_lens[sorted_lens.size() / 2];
    f.local_scale = global_median;
    f.membership_tol = params.break_factor * global_median;

    std::vector<bool> cut(mst.size(), false);
    for (size_t i = 0; i < mst.size(); ++i) {
        auto [a, bb] = mst[i];
        std::vector<double> loc;
        for (size_t j = 0; j < mst.size(); ++j) {
            if (j == i) continue;
            auto [c, d] = mst[j];
            if (c == a || c == bb || d == a || d == bb) loc.push_back(lens[j]);
        }
        double med = global_median;
        if (!loc.empty()) {
            std::sort(loc.begin(), loc.end());
            med = loc[loc.size() / 2];
        }
        if (lens[i] > params.break_factor * med) cut[i] = true;
    }
    std::vector<std::vector<int>> g(n);
    for (size_t i = 0; i < mst.size(); ++i)
        if (!cut[i]) {
            g[mst[i].first].push_back(mst[i].second);
            g[mst[i].second].push_back(mst[i].first);
        }

    std::vector<int> vertex_of(n, -1);
    auto ensure_vertex = [&](int p) {
        if (vertex_of[p] < 0) {
            vertex_of[p] = static_cast<int>(f.vertices.size());
            VertexKind kind =
                g[p].size() >= 3 ? VertexKind::Junction : VertexKind::Plain;
            f.vertices.push_back({work[p], kind, 0});
        }
        return vertex_of[p];
    };

    std::set<std::pair<int, int>> walked;
    int singletons = 0;
    for (int s0 = 0; s0 < n; ++s0) {
        if (g[s0].size() == 2) continue;
        if (g[s0].empty()) {
            ++singletons;
            continue;
        }
        for (int nb : g[s0]) {
            if (walked.count({s0, nb})) continue;
            std::vector<int> chain{s0, nb};
            walked.insert({s0, nb});
            walked.insert({nb, s0});
            while (g[chain.back()].size() == 2) {
                int prev = chain[chain.size() - 2];
                int next = g[chain.back()][0] == prev ? g[chain.back()][1]
                                                      : g[chain.back()][0];
                walked.insert({chain.back(), next});
                walked.insert({next, chain.back()});
                chain.push_back(next);
            }
            ForestEdge e;
            e.a = ensure_vertex(chain.front());
            e.b = ensure_vertex(chain.back());
            std::vector<cx> pl(chain.size());
            for (size_t i = 0; i < chain.size(); ++i) pl[i] = work[chain[i]];
            e.polyline = simplify_polyline(pl, params.simplify);
            f.edges.push_back(std::move(e));
        }
    }
    if (singletons > 0)
        f.notes.push_back(std::to_string(singletons) +
                          " isolated points dropped from the skeleton");

    // leaf snapping to V/Q roots
    std::vector<int> degree(f.vertices.size(), 0);
    for (const auto& e : f.edges) {
        degree[e.a]++;
        degree[e.b]++;
    }
    std::vector<bool> v_used(vclusters.size(), false), q_used(qclusters.size(), false);
    for (size_t vi = 0; vi < f.vertices.size(); ++vi) {
        if (degree[vi] != 1) continue;
        double best = params.snap;
        int which = -1;
        bool is_v = false;
        for (size_t i = 0; i < vclusters.size(); ++i) {
            double d = std::abs(f.vertices[vi].pos - vclusters[i].first);
            if (d <= best) {
                best = d;
                which = static_cast<int>(i);
                is_v = true;
            }
        }
        for (size_t i = 0; i < qclusters.size(); ++i) {
            double d = std::abs(f.vertices[vi].pos - qclusters[i].first);
            if (d <= best) {
                best = d;
                which = static_cast<int>(i);
                is_v = false;
            }
        }
        if (which < 0) continue;
        cx center = is_v ? vclusters[which].first : qclusters[which].first;
        int mult = is_v ? vclusters[which].second : qclusters[which].second;
        f.vertices[vi].pos = center;
        f.vertices[vi].multiplicity = mult;
        f.vertices[vi].kind = is_v ? VertexKind::VZero
                                   : (mult == k ? VertexKind::Atom : VertexKind::QZero);
        (is_v ? v_used[which] : q_used[which]) = true;
        for (auto& e : f.edges) {
            if (e.a == static_cast<int>(vi)) e.polyline.front() = center;
            if (e.b == static_cast<int>(vi)) e.polyline.back() = center;
        }
    }

    // a root sitting on an edge interior becomes a degree-2 vertex; the
    // canonical coordinate has a corner there, so the edge must be split
    auto insert_on_edge = [&](cx center, int mult, VertexKind kind) {
        int eid = -1;
        double bestd = 1e300;
        size_t bestseg = 1;
        for (size_t e2 = 0; e2 < f.edges.size(); ++e2) {
            const auto& pl = f.edges[e2].polyline;
            for (size_t i = 1; i < pl.size(); ++i) {
                double d = seg_dist(center, pl[i - 1], pl[i]);
                if (d < bestd) {
                    bestd = d;
                    eid = static_cast<int>(e2);
                    bestseg = i;
                }
            }
        }
        double tol = std::max(params.snap, f.membership_tol);
        if (eid < 0 || bestd > tol) return false;
        ForestEdge& e = f.edges[eid];
        int vid = static_cast<int>(f.vertices.size());
        f.vertices.push_back({center, kind, mult});
        ForestEdge tail;
        tail.a = vid;
        tail.b = e.b;
        tail.polyline.assign(e.polyline.begin() + bestseg, e.polyline.end());
        tail.polyline.insert(tail.polyline.begin(), center);
        e.b = vid;
        e.polyline.resize(bestseg + 1);
        e.polyline[bestseg] = center;
        if (polyline_length(tail.polyline) > 1e-12) f.edges.push_back(std::move(tail));
        return true;
    };
    for (size_t i = 0; i < vclusters.size(); ++i)
        if (!v_used[i] &&
            insert_on_edge(vclusters[i].first, vclusters[i].second, VertexKind::VZero))
            v_used[i] = true;
    for (size_t i = 0; i < qclusters.size(); ++i)
        if (!q_used[i] && qclusters[i].second != k &&
            insert_on_edge(qclusters[i].first, qclusters[i].second, VertexKind::QZero))
            q_used[i] = true;

    for (const auto& [c, mult] : qclusters) {
        if (mult != k) continue;
        bool present = false;
        for (const auto& v : f.vertices)
            if (v.kind == VertexKind::Atom && std::abs(v.pos - c) < 1e-9) present = true;
        if (!present) f.vertices.push_back({c, VertexKind::Atom, mult});
    }

    recompute_components(f);
    return f;
}

// ------------------------------------------------------- straightening

StraightenReport verify_straightening(const SupportForest& f, const AlgebraicBranch& b,
                                      double tol) {
    StraightenReport rep;
    rep.tol = tol;
    rep.pass = true;
    for (size_t ei = 0; ei < f.edges.size(); ++ei) {
        const ForestEdge& e = f.edges[ei];
        EdgeCheck ec;
        ec.edge = static_cast<int>(ei);
        double L = e.length();
        if (e.polyline.size() < 2 || L <= 0.0) {
            ec.note = "degenerate edge";
            ec.pass = true;
            rep.edges.push_back(ec);
            continue;
        }
        double trim = std::max(1e-3, 0.02 * L);
        auto typed = [&](int v) {
            return f.vertices[v].kind != VertexKind::Junction &&
                   f.vertices[v].kind != VertexKind::Plain;
        };
        double trim_a = typed(e.a) ? trim : 0.0;
        double trim_b = typed(e.b) ? trim : 0.0;
        int samples = std::max<int>(9, std::min<int>(120, int(L / 0.01)));
        std::vector<cx> zs(samples);
        bool through_root = false;
        for (int i = 0; i < samples; ++i) {
            double s = trim_a + (L - trim_a - trim_b) * double(i) / (samples - 1);
            cx t;
            polyline_at(e.polyline, s, zs[i], t);
            if (b.root_clearance(zs[i]) < 1e-4) through_root = true;
        }
        if (through_root) {
            ec.note = "edge passes through a root disk";
            ec.pass = false;
            rep.pass = false;
            rep.edges.push_back(ec);
            continue;
        }
        int mid = samples / 2;
        BranchState st{zs[mid], b.root_candidates(zs[mid])[0]};
        std::vector<cx> psis(samples);
        psis[mid] = 0.0;
        bool failed = false;
        try {
            cx acc{};
            BranchState cur = st;
            for (int i = mid + 1; i < samples; ++i) {
                cur = psi_step(b, cur, zs[i], acc);
                psis[i] = acc;
            }
            cur = st;
            acc = 0.0;
            for (int i = mid - 1; i >= 0; --i) {
                cur = psi_step(b, cur, zs[i], acc);
                psis[i] = acc;
            }
        } catch (const Error& err) {
            ec.note = err.what();
            ec.pass = false;
            failed = true;
        }
        if (!failed) {
            cx chord = psis[samples - 1] - psis[0];
            ec.psi_length = std::abs(chord);
            if (ec.psi_length < 1e-12) {
                ec.note = "degenerate chord";
                ec.pass = false;
            } else {
                cx dir = chord / ec.psi_length;
                double worst = 0.0;
                for (int i = 0; i < samples; ++i)
                    worst = std::max(worst, std::abs(std::imag((psis[i] - psis[0]) *
                                                               std::conj(dir))));
                ec.deviation = worst / ec.psi_length;
                ec.pass = ec.deviation <= tol;
            }
        }
        if (!ec.pass) rep.pass = false;
        rep.edges.push_back(ec);
    }
    return rep;
}

// ------------------------------------------------------------- plemelj

namespace {

struct DirectedStep {
    int edge;
    bool forward;
};

// next directed edge in the outer-face boundary walk
DirectedStep next_in_walk(const SupportForest& f,
                          const std::vector<std::vector<std::pair<int, bool>>>& incident,
                          DirectedStep cur) {
    const ForestEdge& e = f.edges[cur.edge];
    int v = cur.forward ? e.b : e.a;
    const auto& pl = e.polyline;
    cx back = cur.forward ? pl[pl.size() - 2] - pl.back() : pl[1] - pl.front();
    double alpha = std::arg(back);
    double best_delta = 1e300;
    DirectedStep next{cur.edge, !cur.forward};
    for (auto [eid, fwd] : incident[v]) {
        if (eid == cur.edge && fwd == !cur.forward) continue; // fallback case
        const auto& ipl = f.edges[eid].polyline;
        cx out = fwd ? ipl[1] - ipl.front() : ipl[ipl.size() - 2] - ipl.back();
        double delta = std::fmod(alpha - std::arg(out) + 4.0 * M_PI, 2.0 * M_PI);
        if (delta < 1e-9) delta = 2.0 * M_PI;
        if (delta < best_delta) {
            best_delta = delta;
            next = {eid, fwd};
        }
    }
    return next;
}

} // namespace

PlemeljReport plemelj_density(SupportForest& f, const AlgebraicBranch& b,
                              double offset) {
    PlemeljReport rep;

    std::vector<std::vector<double>> grids(f.edges.size());
    for (size_t ei = 0; ei < f.edges.size(); ++ei) {
        ForestEdge& e = f.edges[ei];
        if (e.exceptional || e.polyline.size() < 2) continue;
        double L = e.length();
        double s0 = std::max(2.0 * offset, 1e-3);
        if (L < 4.0 * s0) {
            rep.notes.push_back("edge " + std::to_string(ei) +
                                " too short for density sampling");
            continue;
        }
        std::set<double> grid;
        int uni = std::min(400, std::max(9, int(L / 0.02)));
        for (int i = 0; i <= uni; ++i) grid.insert(s0 + (L - 2 * s0) * double(i) / uni);
        for (double s = s0; s < 0.06 * L; s *= 2.0) {
            grid.insert(s);
            grid.insert(L - s);
        }
        grids[ei].assign(grid.begin(), grid.end());
        e.density_arc = grids[ei];
        e.density.assign(grids[ei].size(), -1.0);
    }

    std::vector<std::vector<cx>> wplus(f.edges.size()), wminus(f.edges.size());
    std::vector<std::vector<char>> hplus(f.edges.size()), hminus(f.edges.size());
    for (size_t ei = 0; ei < f.edges.size(); ++ei) {
        wplus[ei].assign(grids[ei].size(), cx{});
        wminus[ei].assign(grids[ei].size(), cx{});
        hplus[ei].assign(grids[ei].size(), 0);
        hminus[ei].assign(grids[ei].size(), 0);
    }

    std::vector<std::vector<std::pair<int, bool>>> incident(f.vertices.size());
    for (size_t ei = 0; ei < f.edges.size(); ++ei) {
        if (f.edges[ei].exceptional || f.edges[ei].polyline.size() < 2) continue;
        incident[f.edges[ei].a].push_back({static_cast<int>(ei), true});
        incident[f.edges[ei].b].push_back({static_cast<int>(ei), false});
    }

    std::vector<int> edge_comp(f.edges.size(), -1);
    int ncomp = 0;
    {
        std::vector<int> vcomp(f.vertices.size(), -1);
        for (size_t i = 0; i < f.vertices.size(); ++i) {
            if (vcomp[i] >= 0 || incident[i].empty()) continue;
            std::vector<int> stack{static_cast<int>(i)};
            vcomp[i] = ncomp;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (auto [eid, fwd] : incident[u]) {
                    (void)fwd;
                    edge_comp[eid] = vcomp[u];
                    int other = f.edges[eid].a == u ? f.edges[eid].b : f.edges[eid].a;
                    if (vcomp[other] < 0) {
                        vcomp[other] = vcomp[u];
                        stack.push_back(other);
                    }
                }
            }
            ++ncomp;
        }
    }

    for (int target = 0; target < ncomp; ++target) {
        int start_edge = -1;
        bool start_fwd = true;
        double best_re = -1e300;
        for (size_t ei = 0; ei < f.edges.size(); ++ei) {
            if (edge_comp[ei] != target) continue;
            for (bool fwd : {true, false}) {
                int v = fwd ? f.edges[ei].a : f.edges[ei].b;
                if (incident[v].size() == 1 && f.vertices[v].pos.real() > best_re) {
                    best_re = f.vertices[v].pos.real();
                    start_edge = static_cast<int>(ei);
                    start_fwd = fwd;
                }
            }
        }
        if (start_edge < 0) continue;

        int leaf_v = start_fwd ? f.edges[start_edge].a : f.edges[start_edge].b;
        const auto& spl = f.edges[start_edge].polyline;
        cx tin = start_fwd ? spl[1] - spl.front() : spl[spl.size() - 2] - spl.back();
        tin /= std::abs(tin);
        cx outside = f.vertices[leaf_v].pos - tin * std::max(4.0 * offset, 0.05);

        BranchState st = branch_start(b);
        bool routed = false;
        {
            double R = std::abs(b.anchor_z) * 1.2;
            std::vector<std::vector<cx>> candidates{{outside}};
            for (double ang : {0.0, M_PI / 2, M_PI, 3 * M_PI / 2})
                candidates.push_back({std::polar(R, ang), outside});
            for (const auto& cand : candidates) {
                std::vector<cx> path{st.z};
                path.insert(path.end(), cand.begin(), cand.end());
                bool crosses = false;
                for (size_t i = 1; i < path.size() && !crosses; ++i)
                    for (const auto& e2 : f.edges) {
                        for (size_t j = 1; j < e2.polyline.size(); ++j)
                            if (segments_cross(path[i - 1], path[i],
                                               e2.polyline[j - 1], e2.polyline[j])) {
                                crosses = true;
                                break;
                            }
                        if (crosses) break;
                    }
                if (crosses) continue;
                try {
                    BranchState s2 = st;
                    for (size_t i = 1; i < path.size(); ++i)
                        s2 = branch_continue(b, s2, path[i]);
                    st = s2;
                    routed = true;
                    break;
                } catch (const Error&) {
                }
            }
        }
        if (!routed) {
            rep.notes.push_back("component " + std::to_string(target) +
                                ": no crossing-free route from the anchor");
            continue;
        }

        size_t total_steps = 0;
        for (size_t ei = 0; ei < f.edges.size(); ++ei)
            if (edge_comp[ei] == target) total_steps += 2;

        DirectedStep cur{start_edge, start_fwd};
        cx w_first{};
        bool have_first = false;
        for (size_t step = 0; step < total_steps; ++step) {
            ForestEdge& e = f.edges[cur.edge];
            const auto& grid = grids[cur.edge];
            for (size_t gi = 0; gi < grid.size(); ++gi) {
                size_t idx = cur.forward ? gi : grid.size() - 1 - gi;
                double s = grid[idx];
                cx z, t;
                polyline_at(e.polyline, s, z, t);
                cx walk_t = cur.forward ? t : -t;
                cx p = z + offset * cx{0, 1} * walk_t;
                if (b.root_clearance(p) < 1e-6) {
                    ++rep.skipped_samples;
                    continue;
                }
                try {
                    st = branch_continue(b, st, p);
                } catch (const Error&) {
                    ++rep.skipped_samples;
                    continue;
                }
                if (!have_first) {
                    w_first = st.w;
                    have_first = true;
                }
                if (cur.forward) {
                    wplus[cur.edge][idx] = st.w;
                    hplus[cur.edge][idx] = 1;
                } else {
                    wminus[cur.edge][idx] = st.w;
                    hminus[cur.edge][idx] = 1;
                }
            }

            DirectedStep nxt = next_in_walk(f, incident, cur);
            int v = cur.forward ? e.b : e.a;
            cx vpos = f.vertices[v].pos;
            cx last_p = st.z;
            const ForestEdge& en = f.edges[nxt.edge];
            const auto& gridn = grids[nxt.edge];
            double Ln = en.length();
            double s_first = gridn.empty() ? 0.5 * Ln
                                           : (nxt.forward ? gridn.front() : gridn.back());
            cx zn, tn;
            polyline_at(en.polyline, s_first, zn, tn);
            cx walk_tn = nxt.forward ? tn : -tn;
            cx next_p = zn + offset * cx{0, 1} * walk_tn;

            double r1 = std::abs(last_p - vpos), r2 = std::abs(next_p - vpos);
            double a1 = std::arg(last_p - vpos), a2 = std::arg(next_p - vpos);
            std::vector<double> blocked;
            for (auto [eid, fwd] : incident[v]) {
                const auto& ipl = f.edges[eid].polyline;
                cx out = fwd ? ipl[1] - ipl.front() : ipl[ipl.size() - 2] - ipl.back();
                blocked.push_back(std::arg(out));
            }
            auto sweep_clear = [&](double from, double to, int dir) {
                double span = dir > 0 ? std::fmod(to - from + 4 * M_PI, 2 * M_PI)
                                      : std::fmod(from - to + 4 * M_PI, 2 * M_PI);
                for (double bang : blocked) {
                    double off = dir > 0 ? std::fmod(bang - from + 4 * M_PI, 2 * M_PI)
                                         : std::fmod(from - bang + 4 * M_PI, 2 * M_PI);
                    if (off > 1e-6 && off < span - 1e-6) return false;
                }
                return true;
            };
            int dir = sweep_clear(a1, a2, -1) ? -1 : +1;
            double span = dir > 0 ? std::fmod(a2 - a1 + 4 * M_PI, 2 * M_PI)
                                  : std::fmod(a1 - a2 + 4 * M_PI, 2 * M_PI);
            int arcs = std::max(2, int(span / 0.5) + 1);
            for (int i = 1; i <= arcs; ++i) {
                double frac = double(i) / arcs;
                double ang = a1 + dir * span * frac;
                double rr = std::max(r1 + (r2 - r1) * frac, 0.5 * offset);
                cx p = vpos + std::polar(rr, ang);
                if (b.root_clearance(p) < 1e-6) continue;
                try {
                    st = branch_continue(b, st, p);
                } catch (const Error&) {
                    rep.notes.push_back("corner continuation skipped at vertex " +
                                        std::to_string(v));
                    break;
                }
            }
            cur = nxt;
        }
        if (have_first) {
            // closing the loop must reproduce the first sample's value
            const auto& grid = grids[start_edge];
            if (!grid.empty()) {
                ForestEdge& e = f.edges[start_edge];
                size_t idx = start_fwd ? 0 : grid.size() - 1;
                cx z, t;
                polyline_at(e.polyline, grid[idx], z, t);
                cx walk_t = start_fwd ? t : -t;
                cx p = z + offset * cx{0, 1} * walk_t;
                try {
                    st = branch_continue(b, st, p);
                    if (std::abs(st.w - w_first) > 1e-6 * std::abs(w_first))
                        rep.notes.push_back("boundary-walk monodromy mismatch on "
                                            "component " +
                                            std::to_string(target));
                } catch (const Error&) {
                }
            }
        }
    }

    for (size_t ei = 0; ei < f.edges.size(); ++ei) {
        ForestEdge& e = f.edges[ei];
        if (e.exceptional || grids[ei].empty()) continue;
        const auto& grid = grids[ei];
        double L = e.length();
        for (size_t i = 0; i < grid.size(); ++i)
            if (hplus[ei][i] && hminus[ei][i])
                e.density[i] = std::abs(wplus[ei][i] - wminus[ei][i]) / (2.0 * M_PI);
        for (size_t i = 0; i < grid.size(); ++i) {
            if (e.density[i] >= 0) continue;
            double left = -1, right = -1;
            for (int j = int(i) - 1; j >= 0; --j)
                if (e.density[j] >= 0) {
                    left = e.density[j];
                    break;
                }
            for (size_t j = i + 1; j < grid.size(); ++j)
                if (e.density[j] >= 0) {
                    right = e.density[j];
                    break;
                }
            e.density[i] = left >= 0 && right >= 0 ? 0.5 * (left + right)
                           : left >= 0             ? left
                           : right >= 0            ? right
                                                   : 0.0;
        }
        double mass = 0.0;
        for (size_t i = 1; i < grid.size(); ++i)
            mass += 0.5 * (e.density[i] + e.density[i - 1]) * (grid[i] - grid[i - 1]);
        // endpoint tails: rho ~ c s^(-beta), fitted on the innermost samples
        auto tail = [&](size_t i1, size_t i2, double s1, double s2) {
            double rr1 = e.density[i1], rr2 = e.density[i2];
            if (rr1 <= 0 || rr2 <= 0 || s1 <= 0 || s2 <= s1) return 0.0;
            double beta = std::log(rr1 / rr2) / std::log(s2 / s1);
            beta = std::clamp(beta, -2.0, 0.95);
            return rr1 * s1 / (1.0 - beta);
        };
        if (grid.size() >= 2) {
            mass += tail(0, 1, grid[0], grid[1]);
            size_t m = grid.size();
            mass += tail(m - 1, m - 2, L - grid[m - 1], L - grid[m - 2]);
        }
        e.mass = mass;
        rep.edge_mass += mass;
    }

    // atom mass = |Vt(a)/Qdef(a)|^{1/k} with the k-fold factor deflated;
    // this is the residue of the pinned branch of C at the pole
    for (auto& v : f.vertices) {
        if (v.kind != VertexKind::Atom) continue;
        PointSet qr = b.qroots;
        std::sort(qr.begin(), qr.end(), [&](cx x, cx y) {
            return std::abs(x - v.pos) < std::abs(y - v.pos);
        });
        std::vector<cx> q = b.qt.coeffs();
        for (int i = 0; i < b.k && i < int(qr.size()); ++i) q = deflate(q, qr[i]);
        Poly qdef{std::move(q)};
        double mass =
            std::pow(std::abs(eval(b.vt, v.pos) / eval(qdef, v.pos)), 1.0 / b.k);
        rep.atom_mass += mass;
    }
    return rep;
}

// ---------------------------------------------------- extended support

ExtendReport extended_support(SupportForest& f, const AlgebraicBranch& b,
                              const BuildParams& params) {
    ExtendReport rep;
    auto vclusters = cluster_points(b.vroots, 1e-6);
    for (const auto& [a, p] : vclusters) {
        bool on_forest = false;
        for (const auto& v : f.vertices)
            if (std::abs(v.pos - a) <= params.snap) on_forest = true;
        if (!on_forest && !f.edges.empty() &&
            f.dist_to_edges(a) <= std::max(params.snap, f.membership_tol))
            on_forest = true;
        if (on_forest) continue;

        // local expansion (Vt/Qt)^{1/k} ~ c (z-a)^{p/k}; the trajectories
        // able to end at the root leave along p+k equally spaced directions
        std::vector<cx> vdef = b.vt.coeffs();
        for (int i = 0; i < p; ++i) vdef = deflate(vdef, a);
        cx ratio = eval(Poly{std::vector<cx>(vdef)}, a) / eval(b.qt, a);
        double argc = std::arg(ratio) / b.k;
        double theta0 = double(b.k) / (p + b.k) * (M_PI - argc);

        int va = -1;
        const double h = 1e-3;
        for (int j = 0; j < p + b.k; ++j) {
            double theta = theta0 + 2.0 * M_PI * j / (p + b.k);
            cx dir = std::polar(1.0, theta);
            cx start = a + h * dir;
            TraceParams tp;
            tp.obstacles = &f;
            Trajectory tr;
            try {
                tr = trace_trajectory(b, start, dir, tp);
            } catch (const Error& e2) {
                rep.non_terminating.push_back("seed " + std::to_string(j) +
                                              " from V-root: " + e2.what());
                continue;
            }
            int target_vertex = -1;
            if (tr.stop == TraceStop::Obstacle && tr.hit_edge >= 0) {
                // attach to the nearest endpoint if close, else split
                ForestEdge& he = f.edges[tr.hit_edge];
                if (std::abs(tr.stop_at - f.vertices[he.a].pos) <= params.snap)
                    target_vertex = he.a;
                else if (std::abs(tr.stop_at - f.vertices[he.b].pos) <= params.snap)
                    target_vertex = he.b;
                else {
                    size_t bestseg = 1;
                    double bestd = 1e300;
                    for (size_t i = 1; i < he.polyline.size(); ++i) {
                        double d =
                            seg_dist(tr.stop_at, he.polyline[i - 1], he.polyline[i]);
                        if (d < bestd) {
                            bestd = d;
                            bestseg = i;
                        }
                    }
                    target_vertex = static_cast<int>(f.vertices.size());
                    f.vertices.push_back({tr.stop_at, VertexKind::Junction, 0});
                    ForestEdge tail;
                    tail.a = target_vertex;
                    tail.b = he.b;
                    tail.exceptional = he.exceptional;
                    tail.polyline.assign(he.polyline.begin() + bestseg,
                                         he.polyline.end());
                    tail.polyline.insert(tail.polyline.begin(), tr.stop_at);
                    he.b = target_vertex;
                    he.polyline.resize(bestseg + 1);
                    he.polyline[bestseg] = tr.stop_at;
                    f.edges.push_back(std::move(tail));
                }
            } else if (tr.stop == TraceStop::RootDisk) {
                for (size_t vi = 0; vi < f.vertices.size(); ++vi)
                    if (std::abs(f.vertices[vi].pos - tr.stop_at) <=
                        std::max(params.snap, 2e-3))
                        target_vertex = static_cast<int>(vi);
                if (target_vertex < 0) {
                    VertexKind kind = VertexKind::Plain;
                    int mult = 0;
                    for (const auto& [qc, qm] : cluster_points(b.qroots, 1e-6))
                        if (std::abs(qc - tr.stop_at) < 1e-6) {
                            kind = qm == b.k ? VertexKind::Atom : VertexKind::QZero;
                            mult = qm;
                        }
                    for (const auto& [vc, vm] : vclusters)
                        if (std::abs(vc - tr.stop_at) < 1e-6) {
                            kind = VertexKind::VZero;
                            mult = vm;
                        }
                    target_vertex = static_cast<int>(f.vertices.size());
                    f.vertices.push_back({tr.stop_at, kind, mult});
                }
            } else {
                rep.non_terminating.push_back(
                    "seed " + std::to_string(j) + " from V-root at (" +
                    std::to_string(a.real()) + ", " + std::to_string(a.imag()) +
                    ") left the region without landing");
                continue;
            }
            if (va < 0) {
                va = static_cast<int>(f.vertices.size());
                f.vertices.push_back({a, VertexKind::VZero, p});
            }
            ForestEdge ex;
            ex.a = va;
            ex.b = target_vertex;
            ex.exceptional = true;
            ex.polyline.push_back(a);
            for (cx z : tr.points) ex.polyline.push_back(z);
            ex.polyline.push_back(f.vertices[target_vertex].pos);
            f.edges.push_back(std::move(ex));
            ++rep.added_edges;
        }
    }
    recompute_components(f);
    return rep;
}

TreeReport verify_tree(const SupportForest& f) {
    TreeReport rep;
    const size_t nv = f.vertices.size();
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<char> in_graph(nv, 0);
    size_t ne = 0;
    for (const auto& e : f.edges) {
        if (e.a < 0 || e.b < 0) continue;
        ++ne;
        in_graph[e.a] = in_graph[e.b] = 1;
        parent[find(e.a)] = find(e.b);
    }
    for (size_t i = 0; i < nv; ++i)
        if (f.vertices[i].kind == VertexKind::Atom) in_graph[i] = 1;
    std::set<int> comps;
    size_t used = 0;
    for (size_t i = 0; i < nv; ++i)
        if (in_graph[i]) {
            comps.insert(find(int(i)));
            ++used;
        }
    rep.components = static_cast<int>(comps.size());
    rep.connected = rep.components <= 1;
    rep.acyclic = ne + comps.size() == used;
    rep.pass = rep.connected && rep.acyclic;
    return rep;
}

CensusReport component_census(const SupportForest& f, int k) {
    CensusReport rep;
    rep.pass = true;
    for (size_t c = 0; c < f.components.size(); ++c) {
        CensusReport::Row row;
        row.component = static_cast<int>(c);
        row.q_roots = f.components[c].q_roots;
        row.v_roots = f.components[c].v_roots;
        int diff = row.q_roots - row.v_roots;
        row.pass = diff == 0 || diff == k;
        if (!row.pass) rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace lame
