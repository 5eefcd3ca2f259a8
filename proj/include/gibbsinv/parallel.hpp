#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gibbsinv {

/// Run body(worker, i) for i in [0, n) on up to `threads` workers. Items are
/// split into contiguous chunks, so results written per index are independent
/// of the thread count.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(std::size_t{0}, i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = n * w / workers;
                const std::size_t hi = n * (w + 1) / workers;
                for (std::size_t i = lo; i < hi; ++i) body(w, i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace gibbsinv
