#ifndef CONDET_PARALLEL_HPP
#define CONDET_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace condet {

// Worker-thread cap from the CONDET_THREADS environment variable; 0 or
// unset means one thread per hardware core.
inline unsigned threads_from_env() {
    unsigned requested = 0;
    if (const char* env = std::getenv("CONDET_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && value > 0) requested = static_cast<unsigned>(value);
    }
    if (requested == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        requested = hw == 0 ? 1 : hw;
    }
    return requested;
}

// Runs fn(0..n-1), possibly on several threads. Each index is handled
// exactly once; callers keep determinism by writing only to per-index
// slots. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned worker_count = static_cast<unsigned>(
        std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (unsigned w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& worker : workers) worker.join();
}

}  // namespace condet

#endif  // CONDET_PARALLEL_HPP
