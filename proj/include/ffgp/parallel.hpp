// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_PARALLEL_HPP
#define FFGP_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ffgp {

// Runs index-parallel loops on a fixed number of workers. Work items are
// handed out dynamically, so callers must write results by index only.
class Executor {
public:
    explicit Executor(std::size_t workers = 1)
        : workers_(std::max<std::size_t>(workers, 1))
    {
    }

    [[nodiscard]] auto workers() const noexcept -> std::size_t { return workers_; }

    // fn(index, worker) for every index in [0, n); worker < workers().
    template <typename F>
    void parallel_for(std::size_t n, F&& fn) const
    {
        if (n == 0) {
            return;
        }
        auto const active = std::min(workers_, n);
        if (active == 1) {
            for (std::size_t i = 0; i < n; ++i) {
                fn(i, std::size_t { 0 });
            }
            return;
        }

        constexpr std::size_t grain = 16;
        std::atomic<std::size_t> next { 0 };
        std::exception_ptr error;
        std::mutex error_mutex;

        auto body = [&](std::size_t worker) {
            try {
                for (;;) {
                    auto const begin = next.fetch_add(grain, std::memory_order_relaxed);
                    if (begin >= n) {
                        break;
                    }
                    auto const end = std::min(begin + grain, n);
                    for (auto i = begin; i < end; ++i) {
                        fn(i, worker);
                    }
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n);
            }
        };

        {
            std::vector<std::jthread> threads;
            threads.reserve(active - 1);
            for (std::size_t w = 1; w < active; ++w) {
                threads.emplace_back(body, w);
            }
            body(0);
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

private:
    std::size_t workers_;
};

} // namespace ffgp

#endif
