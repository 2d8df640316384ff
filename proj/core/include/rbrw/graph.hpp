#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbrw/common.hpp"

namespace rbrw {

enum class GraphFamily { LatticeBox, LatticeTorus, Tree, Custom };

// Finite connected graph with a reference vertex. Vertices are indexed
// densely 0..V-1; human-readable labels (coordinates, tree paths) are kept
// for I/O only. Immutable after construction.
struct Graph {
    GraphFamily family = GraphFamily::Custom;
    std::vector<std::vector<int>> adjacency;  // sorted, symmetric neighbor lists
    std::vector<int> dist;                    // graph distance to root
    std::vector<std::string> labels;
    int root = 0;
    int max_degree = 0;  // D

    // Family parameters, retained for closed-form dispatch.
    int lattice_dim = 0;     // d (lattice families)
    int lattice_side = 0;    // L
    int tree_branching = 0;  // n (tree family): interior degree n+1
    int tree_depth = 0;

    int vertex_count() const { return static_cast<int>(adjacency.size()); }
    int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
    bool has_edge(int u, int v) const;

    // Ball of radius r around a center (graph metric).
    VertexSet ball(int center, int radius) const;
    VertexSet all_vertices() const { return VertexSet::all(vertex_count()); }

    // Interior of a region: vertices all of whose neighbors lie inside.
    VertexSet interior(const VertexSet& region) const;
};

using GraphPtr = std::shared_ptr<const Graph>;

GraphPtr build_lattice_box(int d, int side);
GraphPtr build_lattice_torus(int d, int side);
GraphPtr build_tree(int branching, int depth);
// Arbitrary adjacency (self-loops permitted); must be connected.
GraphPtr build_custom(int vertex_count, const std::vector<std::pair<int, int>>& edges,
                      int root = 0);

enum class KernelKind { Simple, BiasedTree };

// Info carried by kernels on the tree family, enabling the exact radial
// (depth-only) reductions used by the spectral module.
struct TreeKernelInfo {
    int branching = 0;  // n
    double p = 0.0;     // outward weight per child at depth >= 2
};

// Nonnegative nearest-neighbor transition kernel. Rows are sparse entry
// lists; row sums are 1 for unrestricted stochastic rows and may be < 1 for
// truncated or restricted ones (lost mass is absorbed). Immutable.
struct Kernel {
    struct Entry {
        int target;
        double weight;
    };

    GraphPtr graph;
    std::vector<std::vector<Entry>> rows;
    std::vector<double> row_sums;
    bool substochastic = false;
    std::optional<TreeKernelInfo> tree;

    int vertex_count() const { return static_cast<int>(rows.size()); }
    double weight(int x, int y) const;
    double row_sum(int x) const { return row_sums[x]; }
    double column_sum(int y) const;

    // w'(x) = sum_z p(z, x) w(z); one power step of P^T.
    std::vector<double> apply_transpose(const std::vector<double>& w) const;
    // w'(x) = sum_y p(x, y) w(y); one power step of P.
    std::vector<double> apply(const std::vector<double>& w) const;

    // Vertices with lost row mass (row sum < 1 - 1e-12) among active rows.
    std::vector<int> boundary_vertices() const;
    // Graph distance from each vertex to the nearest boundary vertex
    // (INT_MAX/2 when there is no boundary).
    std::vector<int> distance_to_boundary() const;
};

// Uniform step over the family's nominal directions: 1/(2d) per lattice
// direction, 1/(n+1) per tree edge, 1/deg(x) on custom graphs. Boundary rows
// of boxes and truncated trees lose the mass of their missing directions.
Kernel build_simple_kernel(const GraphPtr& graph);

// Example kernel on the truncated tree T_{n+1}: p to each child when the
// child is at depth >= 2, 1/(n+1) out of the root, 1 - n*p toward the root.
// Requires p in [0, 1/n]. Leaf rows keep only the inward weight.
Kernel build_biased_tree_kernel(const GraphPtr& graph, double p);

// p_Lambda: zero all entries outside Lambda x Lambda; flags the result
// substochastic. Idempotent for a fixed region.
Kernel restrict_kernel(const Kernel& kernel, const VertexSet& region);

// alpha(x) = M^(-|x|) with M > (D-1)^2. The constructor checks inequality
// sum_y q(x,y) alpha(y) <= M alpha(x) against the graph's simple-RW kernel
// and records the outcome.
struct AlphaWeights {
    double M = 0.0;
    std::vector<double> alpha;
    bool verified_on_simple_kernel = false;

    double norm(const std::vector<int>& occupancy) const;
};

AlphaWeights make_alpha_weights(const GraphPtr& graph, double M);
// Default M = (D-1)^2 + 1, the smallest admissible integer margin.
AlphaWeights make_alpha_weights(const GraphPtr& graph);

// Largest violation of sum_y q(x,y) alpha(y) <= M alpha(x) over all rows
// (<= 0 when the inequality holds everywhere).
double alpha_inequality_slack(const Kernel& kernel, const AlphaWeights& weights);

// CSV edge list (src,dst,weight), one row per nonzero kernel entry.
void write_kernel_csv(std::ostream& out, const Kernel& kernel);
void write_graph_csv(std::ostream& out, const Graph& graph);

}  // namespace rbrw
