#pragma once

#include "nsbiot/common.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace nsbiot {

/// Run body(tid, begin, end) on contiguous chunks of [0, n). Chunks are static
/// so results merged in thread order do not depend on scheduling.
template <class F>
void parallel_chunks(Index n, int threads, F&& body) {
    threads = std::max(1, std::min<int>(threads, std::max<Index>(1, n)));
    if (threads == 1) {
        body(0, Index{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const Index chunk = (n + threads - 1) / threads;
    for (int tid = 0; tid < threads; ++tid) {
        const Index b = std::min<Index>(n, tid * chunk);
        const Index e = std::min<Index>(n, b + chunk);
        pool.emplace_back([&, tid, b, e] {
            try {
                body(tid, b, e);
            } catch (...) {
                errors[tid] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Per-thread buffers concatenated in thread order.
template <class T, class F>
std::vector<T> parallel_collect(Index n, int threads, F&& per_item) {
    threads = std::max(1, std::min<int>(threads, std::max<Index>(1, n)));
    std::vector<std::vector<T>> buffers(threads);
    parallel_chunks(n, threads, [&](int tid, Index b, Index e) {
        for (Index i = b; i < e; ++i) per_item(i, buffers[tid]);
    });
    std::vector<T> out;
    std::size_t total = 0;
    for (const auto& buf : buffers) total += buf.size();
    out.reserve(total);
    for (auto& buf : buffers) out.insert(out.end(), buf.begin(), buf.end());
    return out;
}

} // namespace nsbiot
