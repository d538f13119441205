// Fixed-size worker pool executing one data-parallel phase at a time.
#pragma once

#include <algorithm>
#include <barrier>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace hhnet {

class WorkerPool {
public:
    explicit WorkerPool(unsigned workers)
        : size_(std::max(1u, workers)), start_(size_), done_(size_) {
        for (unsigned w = 1; w < size_; ++w) threads_.emplace_back([this, w] { loop(w); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        if (size_ == 1) return;
        stop_ = true;
        start_.arrive_and_wait();
        for (auto& t : threads_) t.join();
    }

    unsigned size() const { return size_; }

    /// Calls body(begin, end) on disjoint contiguous chunks of [0, n) and
    /// returns once every chunk is finished.
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
        if (size_ == 1 || n < 2 * size_) {
            body(0, n);
            return;
        }
        task_ = [&](unsigned w) {
            const std::size_t begin = n * w / size_;
            const std::size_t end = n * (w + 1) / size_;
            body(begin, end);
        };
        start_.arrive_and_wait();
        task_(0);
        done_.arrive_and_wait();
    }

private:
    void loop(unsigned w) {
        for (;;) {
            start_.arrive_and_wait();
            if (stop_) return;
            task_(w);
            done_.arrive_and_wait();
        }
    }

    unsigned size_;
    std::barrier<> start_;
    std::barrier<> done_;
    std::function<void(unsigned)> task_;
    bool stop_ = false;
    std::vector<std::thread> threads_;
};

}  // namespace hhnet
