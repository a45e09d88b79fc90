// sweep.hpp - Order-preserving parallel map for independent grid points.
//
// Worker count is the hardware concurrency, capped by the QTM_THREADS
// environment variable when it is set. Results come back in input order; if
// several points throw, the exception of the lowest index is rethrown.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qtm {

inline unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QTM_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min<unsigned>(n, unsigned(cap));
        } catch (const std::exception&) {
        }
    }
    return unsigned(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

template <class T, class F>
auto parallel_map(const std::vector<T>& inputs, F&& fn) -> std::vector<decltype(fn(inputs.front()))> {
    using R = decltype(fn(inputs.front()));
    std::vector<R> out(inputs.size());
    std::vector<std::exception_ptr> errors(inputs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < inputs.size();) {
            try {
                out[i] = fn(inputs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = worker_count(inputs.size());
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace qtm
