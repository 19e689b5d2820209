#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lame/forest.hpp"
#include "lame/spectral.hpp"

using namespace lame;

namespace {

AlgebraicBranch legendre_branch() {
    return make_branch(Poly::constant(1.0), Poly{-1.0, 0.0, 1.0}, 2);
}

LameOperator legendre_op() {
    return LameOperator::make(2, {Poly{}, Poly{0.0, 2.0}, Poly{-1.0, 0.0, 1.0}});
}

} // namespace

TEST_CASE("branch anchored by 1/z asymptotics") {
    AlgebraicBranch b = legendre_branch();
    CHECK(std::abs(b.anchor_w * b.anchor_z - cx{1.0}) < 0.2);

    // k=1 is single valued and path independent
    AlgebraicBranch b1 = make_branch(Poly{-0.5, 1.0}, Poly{0.0, -1.0, 1.0}, 1);
    cx target{2.5, 1.0};
    cx w_direct = branch_eval(b1, {b1.anchor_z, target});
    cx w_detour = branch_eval(b1, {b1.anchor_z, cx{0.0, 9.0}, cx{-8.0, 1.0}, target});
    cx expect = eval(b1.vt, target) / eval(b1.qt, target);
    CHECK(std::abs(w_direct - expect) < 1e-10);
    CHECK(std::abs(w_detour - expect) < 1e-10);
}

TEST_CASE("branch_eval principal value at z=2") {
    AlgebraicBranch b = legendre_branch();
    cx w = branch_eval(b, {b.anchor_z, cx{6.0, 0.5}, cx{2.0, 0.0}});
    CHECK(std::abs(w - cx{1.0 / std::sqrt(3.0)}) < 1e-9);
}

TEST_CASE("branch monodromy around a simple pole") {
    AlgebraicBranch b = legendre_branch();
    // loop around the root at +1 only
    std::vector<cx> loop{b.anchor_z, cx{2.0, 0.0},   cx{1.0, 0.5},  cx{0.3, 0.0},
                         cx{1.0, -0.5}, cx{2.0, 0.0}};
    BranchState s = branch_start(b);
    for (size_t i = 1; i < loop.size(); ++i) s = branch_continue(b, s, loop[i]);
    BranchState direct = branch_continue(b, branch_start(b), cx{2.0, 0.0});
    cx factor = s.w / direct.w;
    // k = 2: the loop flips the sheet
    CHECK(std::abs(factor + cx{1.0}) < 1e-9);

    CHECK_THROWS_AS(branch_eval(b, {b.anchor_z, cx{1.0, 1e-9}}), PathError);
}

TEST_CASE("psi closed forms") {
    // k=1, Vt=1, Qt=z: psi = log z
    AlgebraicBranch b = make_branch(Poly::constant(1.0), Poly{0.0, 1.0}, 1);
    std::vector<cx> path{cx{2.0, 0.0}, cx{2.0, 2.0}, cx{-1.0, 2.0}};
    cx got = psi(b, path);
    cx expect = std::log(cx{-1.0, 2.0}) - std::log(cx{2.0, 0.0});
    CHECK(std::abs(got - expect) < 1e-8);

    // k=2 on [2,3]: arccosh(3) - arccosh(2)
    AlgebraicBranch b2 = legendre_branch();
    cx got2 = psi(b2, {cx{2.0, 0.0}, cx{3.0, 0.0}});
    cx expect2 = std::acosh(3.0) - std::acosh(2.0);
    CHECK(std::abs(got2 - expect2) < 1e-8);

    // reversal antisymmetry
    cx fwd = psi(b2, {cx{2.0, 0.0}, cx{2.5, 0.7}, cx{3.0, 0.2}});
    cx rev = psi(b2, {cx{3.0, 0.2}, cx{2.5, 0.7}, cx{2.0, 0.0}});
    CHECK(std::abs(fwd + rev) < 1e-10);
}

TEST_CASE("psi homotopy invariance") {
    AlgebraicBranch b = legendre_branch();
    // two paths from 2 to 2i on the same side of both roots
    cx a{2.0, 0.0}, z{0.0, 2.0};
    cx p1 = psi(b, {a, cx{2.0, 2.0}, z});
    cx p2 = psi(b, {a, cx{3.0, 1.0}, cx{1.5, 2.5}, z});
    CHECK(std::abs(p1 - p2) < 1e-8);
}

TEST_CASE("trace_trajectory on the Legendre segment") {
    AlgebraicBranch b = legendre_branch();
    Trajectory tr = trace_trajectory(b, cx{0.0, 0.0} + cx{0.05, 0.0}, cx{1.0, 0.0});
    CHECK(tr.stop == TraceStop::RootDisk);
    CHECK(std::abs(tr.stop_at - cx{1.0}) < 1e-9);
    for (cx z : tr.points) {
        CHECK(std::abs(z.imag()) < 1e-6);
        CHECK(z.real() < 1.0 + 1e-6);
        CHECK(z.real() > -1.0 - 1e-6);
    }

    // Im psi is constant along the returned polyline
    double worst = 0.0;
    BranchState s = branch_continue(b, branch_start(b), tr.points.front());
    cx acc{};
    for (size_t i = 1; i < tr.points.size(); ++i) {
        s = psi_step(b, s, tr.points[i], acc);
        worst = std::max(worst, std::abs(std::imag(acc)));
    }
    CHECK(worst <= 1e-6 * std::max(1.0, tr.length));
}

TEST_CASE("build_from_roots on a segment") {
    // points on [-1,1] with endpoints at the roots of Q
    PointSet pts;
    const int n = 41;
    for (int i = 0; i < n; ++i) pts.push_back(cx{-1.0 + 2.0 * i / (n - 1), 0.0});
    SupportForest f =
        build_from_roots(pts, {}, {}, {cx{-1.0}, cx{1.0}}, 2);
    REQUIRE(f.edges.size() == 1);
    REQUIRE(f.vertices.size() == 2);
    CHECK(f.vertices[0].kind == VertexKind::QZero);
    CHECK(f.vertices[1].kind == VertexKind::QZero);
    CHECK(f.components.size() == 1);
    CHECK(f.components[0].q_roots == 2);

    CHECK_THROWS_AS(build_from_roots(PointSet(10, cx{}), {}, {}, {cx{1.0}}, 1), Error);
}

TEST_CASE("build_from_roots separates distant clusters") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    PointSet pts;
    for (int i = 0; i < 15; ++i) pts.push_back(cx{-0.5 + 0.07 * i, 0.01 * u(rng)});
    for (int i = 0; i < 15; ++i) pts.push_back(cx{7.0 + 0.07 * i, 0.01 * u(rng)});
    SupportForest f = build_from_roots(pts, {}, {}, {}, 2);
    CHECK(f.components.size() == 2);
}

TEST_CASE("atom-only forest for k=1") {
    // roots of S = z^m (z-1)^(n-m): all samples sit at the two Q roots
    PointSet pts;
    for (int i = 0; i < 12; ++i) pts.push_back(cx{0.0});
    for (int i = 0; i < 13; ++i) pts.push_back(cx{1.0});
    SupportForest f = build_from_roots(pts, {}, {cx{0.48}}, {cx{0.0}, cx{1.0}}, 1);
    CHECK(f.edges.empty());
    REQUIRE(f.vertices.size() == 2);
    for (const auto& v : f.vertices) CHECK(v.kind == VertexKind::Atom);
    CensusReport census = component_census(f, 1);
    CHECK(census.pass);
    REQUIRE(census.rows.size() == 2);
    for (const auto& r : census.rows) {
        CHECK(r.q_roots == 1);
        CHECK(r.v_roots == 0);
    }
}

TEST_CASE("straightening on the Legendre segment and a bent negative control") {
    PointSet nodes = exactly_solvable_nodes(legendre_op(), 80);
    SupportForest f = build_from_roots(nodes, {}, {}, {cx{-1.0}, cx{1.0}}, 2);
    AlgebraicBranch b = legendre_branch();
    StraightenReport rep = verify_straightening(f, b, 0.05);
    CHECK(rep.pass);
    for (const auto& e : rep.edges) CHECK(e.deviation < 5e-3);

    // deliberately bent arc with the same endpoints
    SupportForest bent = f;
    for (auto& e : bent.edges) {
        std::vector<cx> arc;
        for (int i = 0; i <= 40; ++i) {
            double t = double(i) / 40;
            double x = -1.0 + 2.0 * t;
            arc.push_back(cx{x, 0.6 * std::sin(M_PI * t)});
        }
        e.polyline = arc;
    }
    StraightenReport bad = verify_straightening(bent, b, 0.05);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("plemelj density reproduces the arcsine law") {
    PointSet nodes = exactly_solvable_nodes(legendre_op(), 200);
    SupportForest f = build_from_roots(nodes, {}, {}, {cx{-1.0}, cx{1.0}}, 2);
    AlgebraicBranch b = legendre_branch();
    PlemeljReport rep = plemelj_density(f, b);
    REQUIRE(f.edges.size() == 1);
    const ForestEdge& e = f.edges[0];
    double worst = 0.0;
    for (size_t i = 0; i < e.density_arc.size(); ++i) {
        double x = -1.0 + e.density_arc[i]; // arc position = x + 1 on the segment
        if (std::abs(x) > 0.9) continue;
        double want = 1.0 / (M_PI * std::sqrt(1.0 - x * x));
        worst = std::max(worst, std::abs(e.density[i] - want));
    }
    CHECK(worst <= 1e-3);
    CHECK(rep.edge_mass + rep.atom_mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("plemelj atoms carry the k=1 residue masses") {
    PointSet pts;
    for (int i = 0; i < 12; ++i) pts.push_back(cx{0.0});
    for (int i = 0; i < 18; ++i) pts.push_back(cx{1.0});
    // V = z - 0.4: masses 0.4 at 0 and 0.6 at 1
    SupportForest f = build_from_roots(pts, {}, {cx{0.4}}, {cx{0.0}, cx{1.0}}, 1);
    AlgebraicBranch b = make_branch(Poly{-0.4, 1.0}, Poly{0.0, -1.0, 1.0}, 1);
    PlemeljReport rep = plemelj_density(f, b);
    CHECK(rep.atom_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.edge_mass == 0.0);
}

TEST_CASE("extended support: no new edges when the V root is already present") {
    PointSet nodes = exactly_solvable_nodes(legendre_op(), 60);
    SupportForest f = build_from_roots(nodes, {}, {}, {cx{-1.0}, cx{1.0}}, 2);
    AlgebraicBranch b = legendre_branch();
    ExtendReport rep = extended_support(f, b);
    CHECK(rep.added_edges == 0);
    TreeReport tree = verify_tree(f);
    CHECK(tree.pass);
}

TEST_CASE("extended support joins atoms through the V root for k=1") {
    PointSet pts;
    for (int i = 0; i < 12; ++i) pts.push_back(cx{0.0});
    for (int i = 0; i < 18; ++i) pts.push_back(cx{1.0});
    SupportForest f = build_from_roots(pts, {}, {cx{0.4}}, {cx{0.0}, cx{1.0}}, 1);
    AlgebraicBranch b = make_branch(Poly{-0.4, 1.0}, Poly{0.0, -1.0, 1.0}, 1);
    TreeReport before = verify_tree(f);
    CHECK_FALSE(before.connected); // two atoms, no edges yet
    ExtendReport rep = extended_support(f, b);
    CHECK(rep.added_edges == 2);
    TreeReport after = verify_tree(f);
    CHECK(after.pass);
}

TEST_CASE("census difference equals k on the Legendre component") {
    PointSet nodes = exactly_solvable_nodes(legendre_op(), 60);
    SupportForest f = build_from_roots(nodes, {}, {}, {cx{-1.0}, cx{1.0}}, 2);
    CensusReport rep = component_census(f, 2);
    CHECK(rep.pass);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].q_roots == 2);
    CHECK(rep.rows[0].v_roots == 0);
}

TEST_CASE("figure operator forest at n=60") {
    Poly q = mul(mul(Poly{1.0, 0.0, 1.0}, Poly{cx{-2.0, -3.0}, 1.0}),
                 Poly{cx{-3.0, 2.0}, 1.0});
    auto op = LameOperator::from_composition(3, q);

    SpectrumReport rep39 = solve_r1(op, 39);
    // pair whose normalized V root is closest to the hull centroid
    PointSet qroots = roots(q);
    cx centroid{};
    for (cx r : qroots) centroid += r;
    centroid /= double(qroots.size());
    const SpectralPair* pick = nullptr;
    double best = 1e300;
    for (const auto& p : rep39.pairs) {
        cx vroot = -p.normalized_V.coeff(0);
        if (std::abs(vroot - centroid) < best) {
            best = std::abs(vroot - centroid);
            pick = &p;
        }
    }
    REQUIRE(pick != nullptr);

    auto seq = select_sequence(op, pick->normalized_V, {60});
    const SpectralPair& p60 = seq[0];
    PointSet sroots = stieltjes_roots(op, p60);
    PointSet vroots = roots(p60.normalized_V);

    SupportForest f = build_from_roots(sroots, {}, vroots, qroots, 3);
    AlgebraicBranch b = make_branch(p60.normalized_V, q, 3);

    // all leaves snap to V or Q roots
    std::vector<int> degree(f.vertices.size(), 0);
    for (const auto& e : f.edges) {
        degree[e.a]++;
        degree[e.b]++;
    }
    for (size_t i = 0; i < f.vertices.size(); ++i)
        if (degree[i] == 1)
            CHECK(f.vertices[i].kind != VertexKind::Plain);

    StraightenReport sr = verify_straightening(f, b, 0.05);
    CHECK(sr.pass);

    CensusReport census = component_census(f, 3);
    CHECK(census.pass);

    extended_support(f, b);
    TreeReport tree = verify_tree(f);
    CHECK(tree.pass);
}
