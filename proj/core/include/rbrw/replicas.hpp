#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "rbrw/rng.hpp"

namespace rbrw {

// Runs fn(replica_index, stream_seed) for each replica, spread over `jobs`
// threads. Replica streams are derived from the master seed, so results are
// identical whatever the thread count; writers must target disjoint slots.
// The first exception thrown by any replica is rethrown after the pool
// drains.
template <class Fn>
void run_replicas(int count, int jobs, std::uint64_t master_seed, Fn&& fn) {
    if (jobs < 1) jobs = 1;
    if (jobs == 1) {
        for (int r = 0; r < count; ++r) fn(r, replica_seed(master_seed, static_cast<std::uint64_t>(r)));
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                int r = next.fetch_add(1);
                if (r >= count) break;
                try {
                    fn(r, replica_seed(master_seed, static_cast<std::uint64_t>(r)));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    int n = 0;
};

// Sample mean and standard error of iid replica-level values.
inline MeanSe mean_se(const std::vector<double>& values) {
    MeanSe out;
    out.n = static_cast<int>(values.size());
    if (out.n == 0) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / out.n;
    if (out.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.se = std::sqrt(ss / (out.n - 1) / out.n);
    }
    return out;
}

}  // namespace rbrw
