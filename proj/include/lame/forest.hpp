#pragma once

// Geometry of the limit measure: branch-tracked evaluation of (Vt/Qt)^{1/k},
// the canonical coordinate (its primitive) by quadrature, horizontal
// trajectory tracing, reconstruction of the support forest from root
// clouds, and the structural checks (straightening, boundary-jump density,
// exceptional trajectories, tree/census).

#include <string>
#include <vector>

#include "lame/poly.hpp"

namespace lame {

struct PathError : Error {
    PathError(const std::string& msg, int seg) : Error(msg), segment(seg) {}
    int segment;
};

// A branch of (Vt/Qt)^{1/k} pinned by its 1/z asymptotics at the anchor.
struct AlgebraicBranch {
    Poly vt, qt; // monic
    int k = 1;
    cx anchor_z{};
    cx anchor_w{};
    PointSet vroots, qroots;

    double root_clearance(cx z) const;
    std::vector<cx> root_candidates(cx z) const; // all k-th roots of Vt/Qt at z
};

AlgebraicBranch make_branch(const Poly& vt, const Poly& qt, int k);

struct BranchState {
    cx z{};
    cx w{};
};

BranchState branch_start(const AlgebraicBranch& b);

// analytic continuation along the straight segment state.z -> z1
BranchState branch_continue(const AlgebraicBranch& b, BranchState s, cx z1);

// continuation along a polyline that starts at the anchor
cx branch_eval(const AlgebraicBranch& b, const std::vector<cx>& path);

// advances the state to z1 and accumulates the integral of w dz
BranchState psi_step(const AlgebraicBranch& b, BranchState s, cx z1, cx& psi_acc);

// integral of the branch along the polyline (branch fixed by continuation
// from the anchor to path.front() first)
cx psi(const AlgebraicBranch& b, const std::vector<cx>& path);

enum class TraceStop { RootDisk, Box, MaxLength, Recurrence, Obstacle, StepCollapse };

struct SupportForest; // fwd

struct TraceParams {
    double max_length = 60.0;
    double root_disk = 1e-4;
    double local_tol = 1e-8;
    double box_margin = 3.0;
    const SupportForest* obstacles = nullptr;
    double hit_tol = 0.02;
};

struct Trajectory {
    std::vector<cx> points;
    TraceStop stop = TraceStop::StepCollapse;
    cx stop_at{};      // nearest root / hit point when applicable
    int hit_edge = -1; // obstacle edge index
    double length = 0.0;
};

// arc-length march along Im(psi) = const seeded by `direction`
Trajectory trace_trajectory(const AlgebraicBranch& b, cx start, cx direction,
                            const TraceParams& params = {});

enum class VertexKind { VZero, QZero, Junction, Atom, Plain };

struct ForestVertex {
    cx pos{};
    VertexKind kind = VertexKind::Plain;
    int multiplicity = 0; // of the matched root, when typed
};

struct ForestEdge {
    int a = -1, b = -1;
    std::vector<cx> polyline; // runs from vertex a to vertex b
    bool exceptional = false;
    double mass = 0.0;
    std::vector<double> density;     // filled by plemelj_density
    std::vector<double> density_arc; // arc positions of the samples
    double length() const;
};

struct ComponentCensus {
    std::vector<int> vertices;
    int q_roots = 0;
    int v_roots = 0;
};

struct SupportForest {
    std::vector<ForestVertex> vertices;
    std::vector<ForestEdge> edges;
    std::vector<ComponentCensus> components; // non-exceptional components
    std::vector<std::string> notes;
    double local_scale = 0.0;   // median spanning-tree edge length
    double membership_tol = 0.0; // break_factor * local_scale

    double dist_to_edges(cx z, int* edge = nullptr, cx* closest = nullptr) const;
};

struct BuildParams {
    double break_factor = 3.0;
    double simplify = 0.01;
    double snap = 0.05;
    double atom_cluster = 1e-4;
};

// Euclidean spanning tree of the root cloud, long-edge cuts, chain
// simplification, leaf snapping to V/Q roots, atoms at multiplicity-k roots
// of Q, and vertex insertion where V/Q roots sit on an edge interior.
SupportForest build_from_roots(const PointSet& pts, const BuildParams& params,
                               const PointSet& vroots, const PointSet& qroots, int k);

struct EdgeCheck {
    int edge = -1;
    double deviation = 0.0;  // max distance of psi samples from the chord
    double psi_length = 0.0; // normalization
    bool pass = false;
    std::string note;
};

struct StraightenReport {
    std::vector<EdgeCheck> edges;
    double tol = 0.05;
    bool pass = false;
};

// Each support edge must map to a straight segment under the local
// primitive of the branch; deviation is measured against the chord after
// rotating it level, normalized by the chord length.
StraightenReport verify_straightening(const SupportForest& f, const AlgebraicBranch& b,
                                      double tol = 0.05);

struct PlemeljReport {
    double edge_mass = 0.0;
    double atom_mass = 0.0;
    int skipped_samples = 0;
    std::vector<std::string> notes;
};

// Densities from the one-sided branch mismatch |w+ - w-|/(2 pi), walked
// around each component boundary so the two sides stay on consistent
// sheets; atom masses from the deflated-residue formula.
PlemeljReport plemelj_density(SupportForest& f, const AlgebraicBranch& b,
                              double offset = 1e-3);

struct ExtendReport {
    int added_edges = 0;
    std::vector<std::string> non_terminating;
};

// Traces the k+p horizontal directions out of every V root not already on
// the forest and appends the trajectories that land on it.
ExtendReport extended_support(SupportForest& f, const AlgebraicBranch& b,
                              const BuildParams& params = {});

struct TreeReport {
    bool connected = false;
    bool acyclic = false;
    int components = 0;
    bool pass = false;
};

TreeReport verify_tree(const SupportForest& f);

struct CensusReport {
    struct Row {
        int component = -1;
        int q_roots = 0;
        int v_roots = 0;
        bool pass = false;
    };
    std::vector<Row> rows;
    bool pass = false;
};

// Per non-exceptional component, #Q-roots - #V-roots must be 0 or k
// (multiplicity counted).
CensusReport component_census(const SupportForest& f, int k);

} // namespace lame
