#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rbrw {

// Raised by spectral estimators when the finite truncation is too small
// (or the iterates underflow) for the requested number of power steps.
class TruncationTooShallow : public std::runtime_error {
public:
    explicit TruncationTooShallow(const std::string& what) : std::runtime_error(what) {}
};

// Raised by steady-state solvers outside the stable regime gamma > lambda*theta.
class UnstableRegime : public std::runtime_error {
public:
    explicit UnstableRegime(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a pair-system solve would exceed the configured memory budget.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Subset of vertices with O(1) membership. Vertex ids are dense 0..V-1.
class VertexSet {
public:
    VertexSet() = default;
    VertexSet(int vertex_count, std::vector<int> members);

    static VertexSet all(int vertex_count);

    bool contains(int v) const { return v >= 0 && v < static_cast<int>(mask_.size()) && mask_[v]; }
    const std::vector<int>& members() const { return members_; }
    int size() const { return static_cast<int>(members_.size()); }
    bool empty() const { return members_.empty(); }
    int universe_size() const { return static_cast<int>(mask_.size()); }

    bool subset_of(const VertexSet& other) const;
    bool operator==(const VertexSet& other) const { return mask_ == other.mask_; }

private:
    std::vector<char> mask_;
    std::vector<int> members_;  // sorted, unique
};

}  // namespace rbrw
