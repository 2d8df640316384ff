#pragma once

#include <cstddef>
#include <vector>

namespace rbrw {

// Binary sum tree over per-site rates: point update and total in O(log V),
// sampling an index proportionally to its weight in O(log V). Parent sums
// are recomputed from their children on update, so no drift accumulates.
class SumTree {
public:
    explicit SumTree(int size) {
        leaves_ = 1;
        while (leaves_ < static_cast<std::size_t>(size < 1 ? 1 : size)) leaves_ *= 2;
        tree_.assign(2 * leaves_, 0.0);
        size_ = static_cast<std::size_t>(size);
    }

    void set(int i, double w) {
        std::size_t node = leaves_ + static_cast<std::size_t>(i);
        tree_[node] = w;
        for (node /= 2; node >= 1; node /= 2) {
            tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
        }
    }

    double get(int i) const { return tree_[leaves_ + static_cast<std::size_t>(i)]; }
    double total() const { return tree_[1]; }

    // Index whose cumulative-weight interval contains u in [0, total).
    int sample(double u) const {
        std::size_t node = 1;
        while (node < leaves_) {
            node *= 2;
            if (u >= tree_[node] && tree_[node + 1] > 0.0) {
                u -= tree_[node];
                ++node;
            }
        }
        return static_cast<int>(node - leaves_);
    }

private:
    std::size_t leaves_ = 1;
    std::size_t size_ = 0;
    std::vector<double> tree_;
};

}  // namespace rbrw
