#include "invlp/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace invlp {

int max_threads() {
    if (const char* env = std::getenv("INVLP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& fn) {
    if (n <= 0) return;
    const int workers = std::min<Eigen::Index>(max_threads(), n);
    if (workers <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<Eigen::Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const Eigen::Index i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 0; t < workers - 1; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace invlp
