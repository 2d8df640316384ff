#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "rbrw/graph.hpp"

namespace rbrw {

// Occupancy map eta: vertex -> N with cached total count and, when built
// with alpha weights, a cached alpha-norm ||eta|| = sum eta(x) alpha(x).
// Both caches are maintained through every update.
class Configuration {
public:
    Configuration() = default;

    explicit Configuration(int vertex_count, std::shared_ptr<const AlphaWeights> weights = nullptr)
        : occ_(vertex_count, 0), weights_(std::move(weights)) {}

    static Configuration zeros(int vertex_count) { return Configuration(vertex_count); }

    static Configuration delta(int vertex_count, int site) {
        Configuration c(vertex_count);
        c.add(site, 1);
        return c;
    }

    static Configuration uniform(int vertex_count, int level) {
        Configuration c(vertex_count);
        for (int v = 0; v < vertex_count; ++v) c.add(v, level);
        return c;
    }

    // level on every vertex of the region, zero elsewhere
    static Configuration uniform_on(int vertex_count, const VertexSet& region, int level) {
        Configuration c(vertex_count);
        for (int v : region.members()) c.add(v, level);
        return c;
    }

    int operator()(int v) const { return occ_[v]; }
    int size() const { return static_cast<int>(occ_.size()); }
    long long total() const { return total_; }
    const std::vector<int>& occupancies() const { return occ_; }

    void add(int v, int delta) {
        int next = occ_[v] + delta;
        if (next < 0) throw std::logic_error("occupancy would become negative");
        occ_[v] = next;
        total_ += delta;
        if (weights_) alpha_norm_ += delta * weights_->alpha[v];
    }

    void attach_weights(std::shared_ptr<const AlphaWeights> weights) {
        weights_ = std::move(weights);
        alpha_norm_ = weights_ ? weights_->norm(occ_) : 0.0;
    }

    bool has_weights() const { return weights_ != nullptr; }
    double alpha_norm() const { return alpha_norm_; }

    bool operator==(const Configuration& other) const { return occ_ == other.occ_; }

    // partial order: eta <= zeta pointwise
    bool leq(const Configuration& other) const {
        for (int v = 0; v < size(); ++v) {
            if (occ_[v] > other.occ_[v]) return false;
        }
        return true;
    }

private:
    std::vector<int> occ_;
    long long total_ = 0;
    double alpha_norm_ = 0.0;
    std::shared_ptr<const AlphaWeights> weights_;
};

}  // namespace rbrw
