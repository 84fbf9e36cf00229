#pragma once

#include <cstddef>
#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace lmconv {

/// 0 means one worker per hardware thread.
std::size_t resolve_threads(std::size_t requested);

/// Calls f(i) for i in [0, n) on `threads` workers with a fixed contiguous
/// partition and returns the results in index order, so the output does not
/// depend on the worker count. The exception of the lowest failing index is
/// rethrown.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, std::size_t threads, F&& f) {
    std::vector<R> out(n);
    const std::size_t workers = std::max<std::size_t>(1, std::min(resolve_threads(threads), n));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> failed_at(workers, n);
    auto run = [&](std::size_t w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        for (std::size_t i = begin; i < end; ++i) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[w] = std::current_exception();
                failed_at[w] = i;
                return;
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (std::size_t w = 0; w < workers; ++w)
        if (errors[w]) std::rethrow_exception(errors[w]);
    return out;
}

}  // namespace lmconv
