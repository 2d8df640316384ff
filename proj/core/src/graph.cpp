#include "rbrw/graph.hpp"

#include <algorithm>
#include <charconv>
#include <climits>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace rbrw {

namespace {

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj,
                               const std::vector<int>& sources) {
    std::vector<int> dist(adj.size(), INT_MAX / 2);
    std::deque<int> queue;
    for (int s : sources) {
        dist[s] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[u]) {
            if (dist[v] > dist[u] + 1) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

void finalize(Graph& g) {
    for (auto& nbrs : g.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    g.max_degree = 0;
    for (const auto& nbrs : g.adjacency) {
        g.max_degree = std::max(g.max_degree, static_cast<int>(nbrs.size()));
    }
    g.dist = bfs_distances(g.adjacency, {g.root});
    for (int d : g.dist) {
        if (d >= INT_MAX / 2) throw std::invalid_argument("graph is not connected");
    }
}

}  // namespace

bool Graph::has_edge(int u, int v) const {
    const auto& nbrs = adjacency[u];
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

VertexSet Graph::ball(int center, int radius) const {
    auto dist = bfs_distances(adjacency, {center});
    std::vector<int> members;
    for (int v = 0; v < vertex_count(); ++v) {
        if (dist[v] <= radius) members.push_back(v);
    }
    return VertexSet(vertex_count(), std::move(members));
}

VertexSet Graph::interior(const VertexSet& region) const {
    std::vector<int> members;
    for (int v : region.members()) {
        bool inside = true;
        for (int u : adjacency[v]) {
            if (!region.contains(u)) {
                inside = false;
                break;
            }
        }
        if (inside) members.push_back(v);
    }
    return VertexSet(vertex_count(), std::move(members));
}

VertexSet::VertexSet(int vertex_count, std::vector<int> members)
    : mask_(vertex_count, 0), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (int v : members_) {
        if (v < 0 || v >= vertex_count) throw std::invalid_argument("vertex id out of range");
        mask_[v] = 1;
    }
}

VertexSet VertexSet::all(int vertex_count) {
    std::vector<int> members(vertex_count);
    for (int v = 0; v < vertex_count; ++v) members[v] = v;
    return VertexSet(vertex_count, std::move(members));
}

bool VertexSet::subset_of(const VertexSet& other) const {
    for (int v : members_) {
        if (!other.contains(v)) return false;
    }
    return true;
}

GraphPtr build_lattice_box(int d, int side) {
    if (d < 1 || side < 2) throw std::invalid_argument("lattice requires d >= 1, L >= 2");
    auto g = std::make_shared<Graph>();
    g->family = GraphFamily::LatticeBox;
    g->lattice_dim = d;
    g->lattice_side = side;
    int volume = 1;
    for (int i = 0; i < d; ++i) volume *= side;
    g->adjacency.resize(volume);
    g->labels.resize(volume);
    std::vector<int> coord(d);
    for (int v = 0; v < volume; ++v) {
        int rem = v;
        std::string label;
        for (int i = 0; i < d; ++i) {
            coord[i] = rem % side;
            rem /= side;
            label += (i ? "," : "") + std::to_string(coord[i]);
        }
        g->labels[v] = label;
        int stride = 1;
        for (int i = 0; i < d; ++i) {
            if (coord[i] + 1 < side) g->adjacency[v].push_back(v + stride);
            if (coord[i] - 1 >= 0) g->adjacency[v].push_back(v - stride);
            stride *= side;
        }
    }
    // root at the center cell
    int root = 0, stride = 1;
    for (int i = 0; i < d; ++i) {
        root += (side / 2) * stride;
        stride *= side;
    }
    g->root = root;
    finalize(*g);
    return g;
}

GraphPtr build_lattice_torus(int d, int side) {
    if (d < 1 || side < 2) throw std::invalid_argument("lattice requires d >= 1, L >= 2");
    auto g = std::make_shared<Graph>();
    g->family = GraphFamily::LatticeTorus;
    g->lattice_dim = d;
    g->lattice_side = side;
    int volume = 1;
    for (int i = 0; i < d; ++i) volume *= side;
    g->adjacency.resize(volume);
    g->labels.resize(volume);
    std::vector<int> coord(d);
    for (int v = 0; v < volume; ++v) {
        int rem = v;
        std::string label;
        for (int i = 0; i < d; ++i) {
            coord[i] = rem % side;
            rem /= side;
            label += (i ? "," : "") + std::to_string(coord[i]);
        }
        g->labels[v] = label;
        int stride = 1;
        for (int i = 0; i < d; ++i) {
            int up = v + ((coord[i] + 1) % side - coord[i]) * stride;
            int down = v + ((coord[i] - 1 + side) % side - coord[i]) * stride;
            g->adjacency[v].push_back(up);
            g->adjacency[v].push_back(down);
            stride *= side;
        }
    }
    g->root = 0;
    finalize(*g);
    return g;
}

GraphPtr build_tree(int branching, int depth) {
    if (branching < 2 || depth < 0) throw std::invalid_argument("tree requires n >= 2, depth >= 0");
    auto g = std::make_shared<Graph>();
    g->family = GraphFamily::Tree;
    g->tree_branching = branching;
    g->tree_depth = depth;
    g->adjacency.emplace_back();
    g->labels.emplace_back("o");
    std::vector<int> frontier{0};
    for (int level = 1; level <= depth; ++level) {
        std::vector<int> next;
        for (int parent : frontier) {
            int children = (parent == 0) ? branching + 1 : branching;
            for (int c = 0; c < children; ++c) {
                int id = static_cast<int>(g->adjacency.size());
                g->adjacency.emplace_back();
                g->labels.push_back(g->labels[parent] + "." + std::to_string(c));
                g->adjacency[parent].push_back(id);
                g->adjacency[id].push_back(parent);
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    g->root = 0;
    finalize(*g);
    return g;
}

GraphPtr build_custom(int vertex_count, const std::vector<std::pair<int, int>>& edges, int root) {
    if (vertex_count < 1) throw std::invalid_argument("custom graph needs at least one vertex");
    if (root < 0 || root >= vertex_count) throw std::invalid_argument("root out of range");
    auto g = std::make_shared<Graph>();
    g->family = GraphFamily::Custom;
    g->adjacency.resize(vertex_count);
    g->labels.resize(vertex_count);
    for (int v = 0; v < vertex_count; ++v) g->labels[v] = std::to_string(v);
    for (auto [u, v] : edges) {
        if (u < 0 || u >= vertex_count || v < 0 || v >= vertex_count) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        g->adjacency[u].push_back(v);
        if (u != v) g->adjacency[v].push_back(u);
    }
    g->root = root;
    finalize(*g);
    return g;
}

double Kernel::weight(int x, int y) const {
    for (const auto& e : rows[x]) {
        if (e.target == y) return e.weight;
    }
    return 0.0;
}

double Kernel::column_sum(int y) const {
    double s = 0.0;
    for (int x = 0; x < vertex_count(); ++x) {
        s += weight(x, y);
    }
    return s;
}

std::vector<double> Kernel::apply_transpose(const std::vector<double>& w) const {
    std::vector<double> out(w.size(), 0.0);
    for (int z = 0; z < vertex_count(); ++z) {
        if (w[z] == 0.0) continue;
        for (const auto& e : rows[z]) out[e.target] += e.weight * w[z];
    }
    return out;
}

std::vector<double> Kernel::apply(const std::vector<double>& w) const {
    std::vector<double> out(w.size(), 0.0);
    for (int x = 0; x < vertex_count(); ++x) {
        double s = 0.0;
        for (const auto& e : rows[x]) s += e.weight * w[e.target];
        out[x] = s;
    }
    return out;
}

std::vector<int> Kernel::boundary_vertices() const {
    std::vector<int> out;
    for (int x = 0; x < vertex_count(); ++x) {
        if (row_sums[x] > 0.0 && row_sums[x] < 1.0 - 1e-12) out.push_back(x);
    }
    return out;
}

std::vector<int> Kernel::distance_to_boundary() const {
    auto boundary = boundary_vertices();
    if (boundary.empty()) return std::vector<int>(vertex_count(), INT_MAX / 2);
    std::vector<int> dist(vertex_count(), INT_MAX / 2);
    std::deque<int> queue;
    for (int b : boundary) {
        dist[b] = 0;
        queue.push_back(b);
    }
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : graph->adjacency[u]) {
            if (dist[v] > dist[u] + 1) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

namespace {

void cache_row_sums(Kernel& k) {
    k.row_sums.assign(k.vertex_count(), 0.0);
    for (int x = 0; x < k.vertex_count(); ++x) {
        double s = 0.0;
        for (const auto& e : k.rows[x]) s += e.weight;
        k.row_sums[x] = s;
    }
    k.substochastic = false;
    for (double s : k.row_sums) {
        if (s < 1.0 - 1e-12) k.substochastic = true;
        if (s > 1.0 + 1e-12) throw std::logic_error("kernel row sum exceeds 1");
    }
}

}  // namespace

Kernel build_simple_kernel(const GraphPtr& graph) {
    Kernel k;
    k.graph = graph;
    int V = graph->vertex_count();
    k.rows.resize(V);
    for (int v = 0; v < V; ++v) {
        if (graph->adjacency[v].empty()) {
            throw std::invalid_argument("simple kernel undefined on an isolated vertex");
        }
    }
    switch (graph->family) {
        case GraphFamily::LatticeTorus:
        case GraphFamily::LatticeBox: {
            // 1/(2d) per lattice direction; on the torus with L = 2 the two
            // directions reach the same neighbor and their weights merge.
            int d = graph->lattice_dim, side = graph->lattice_side;
            double w = 1.0 / (2.0 * d);
            bool wrap = graph->family == GraphFamily::LatticeTorus;
            for (int v = 0; v < V; ++v) {
                int rem = v, stride = 1;
                for (int i = 0; i < d; ++i) {
                    int c = rem % side;
                    rem /= side;
                    for (int dir : {+1, -1}) {
                        int cc = c + dir;
                        if (wrap) {
                            cc = (cc + side) % side;
                        } else if (cc < 0 || cc >= side) {
                            continue;  // absorbed
                        }
                        int u = v + (cc - c) * stride;
                        bool merged = false;
                        for (auto& e : k.rows[v]) {
                            if (e.target == u) {
                                e.weight += w;
                                merged = true;
                                break;
                            }
                        }
                        if (!merged) k.rows[v].push_back({u, w});
                    }
                    stride *= side;
                }
            }
            break;
        }
        case GraphFamily::Tree: {
            double w = 1.0 / (graph->tree_branching + 1);
            for (int v = 0; v < V; ++v) {
                for (int u : graph->adjacency[v]) k.rows[v].push_back({u, w});
            }
            k.tree = TreeKernelInfo{graph->tree_branching, w};
            break;
        }
        case GraphFamily::Custom: {
            for (int v = 0; v < V; ++v) {
                double w = 1.0 / graph->adjacency[v].size();
                for (int u : graph->adjacency[v]) k.rows[v].push_back({u, w});
            }
            break;
        }
    }
    cache_row_sums(k);
    return k;
}

Kernel build_biased_tree_kernel(const GraphPtr& graph, double p) {
    if (graph->family != GraphFamily::Tree) {
        throw std::invalid_argument("biased-tree kernel requires a tree graph");
    }
    int n = graph->tree_branching;
    if (p < 0.0 || p > 1.0 / n + 1e-15) {
        throw std::invalid_argument("biased-tree kernel requires p in [0, 1/n]");
    }
    Kernel k;
    k.graph = graph;
    int V = graph->vertex_count();
    if (V < 2) throw std::invalid_argument("biased-tree kernel needs depth >= 1");
    k.rows.resize(V);
    for (int v = 0; v < V; ++v) {
        for (int u : graph->adjacency[v]) {
            double w;
            if (graph->dist[u] == graph->dist[v] + 1) {
                // outward move: p if the child sits at depth >= 2, 1/(n+1)
                // out of the root
                w = (v == graph->root) ? 1.0 / (n + 1) : p;
            } else {
                w = 1.0 - n * p;  // inward move
            }
            if (w > 0.0) k.rows[v].push_back({u, w});
        }
    }
    k.tree = TreeKernelInfo{n, p};
    cache_row_sums(k);
    return k;
}

Kernel restrict_kernel(const Kernel& kernel, const VertexSet& region) {
    if (region.empty()) throw std::invalid_argument("restriction to an empty region");
    Kernel k;
    k.graph = kernel.graph;
    k.rows.resize(kernel.vertex_count());
    for (int x = 0; x < kernel.vertex_count(); ++x) {
        if (!region.contains(x)) continue;
        for (const auto& e : kernel.rows[x]) {
            if (region.contains(e.target)) k.rows[x].push_back(e);
        }
    }
    cache_row_sums(k);
    k.substochastic = true;
    return k;
}

AlphaWeights make_alpha_weights(const GraphPtr& graph, double M) {
    int D = graph->max_degree;
    double floor = static_cast<double>(D - 1) * (D - 1);
    if (!(M > floor)) {
        throw std::invalid_argument("alpha weights require M > (D-1)^2 = " + std::to_string(floor));
    }
    AlphaWeights w;
    w.M = M;
    w.alpha.resize(graph->vertex_count());
    for (int v = 0; v < graph->vertex_count(); ++v) {
        w.alpha[v] = std::pow(M, -static_cast<double>(graph->dist[v]));
    }
    w.verified_on_simple_kernel =
        alpha_inequality_slack(build_simple_kernel(graph), w) <= 1e-12;
    return w;
}

AlphaWeights make_alpha_weights(const GraphPtr& graph) {
    int D = graph->max_degree;
    return make_alpha_weights(graph, static_cast<double>(D - 1) * (D - 1) + 1.0);
}

double alpha_inequality_slack(const Kernel& kernel, const AlphaWeights& weights) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < kernel.vertex_count(); ++x) {
        double s = 0.0;
        for (const auto& e : kernel.rows[x]) s += e.weight * weights.alpha[e.target];
        worst = std::max(worst, s - weights.M * weights.alpha[x]);
    }
    return worst;
}

double AlphaWeights::norm(const std::vector<int>& occupancy) const {
    double s = 0.0;
    for (std::size_t v = 0; v < occupancy.size(); ++v) s += occupancy[v] * alpha[v];
    return s;
}

void write_kernel_csv(std::ostream& out, const Kernel& kernel) {
    out << "src,dst,weight\n";
    char buf[32];
    for (int x = 0; x < kernel.vertex_count(); ++x) {
        for (const auto& e : kernel.rows[x]) {
            auto res = std::to_chars(buf, buf + sizeof(buf), e.weight);
            out << x << ',' << e.target << ',' << std::string_view(buf, res.ptr - buf) << '\n';
        }
    }
}

void write_graph_csv(std::ostream& out, const Graph& graph) {
    out << "src,dst,weight\n";
    for (int v = 0; v < graph.vertex_count(); ++v) {
        for (int u : graph.adjacency[v]) {
            if (u >= v) out << v << ',' << u << ",1\n";
        }
    }
}

}  // namespace rbrw
