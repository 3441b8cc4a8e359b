#ifndef RBNLAB_PARALLEL_HPP
#define RBNLAB_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace rbnlab {

// Run body(i) for i in [0, n) on `jobs` workers. Each index is claimed exactly
// once; workers write only into their own slots, so results are deterministic
// regardless of scheduling. jobs <= 0 means hardware_concurrency.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace rbnlab

#endif
