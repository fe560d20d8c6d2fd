#ifndef CDFOREST_PARALLEL_HPP
#define CDFOREST_PARALLEL_HPP

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>

namespace cdforest {

// 0 resolves to the hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

// Runs fn(i) for i in [0, count) on `threads` workers. The work items must
// be independent; exceptions propagate to the caller.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

// Runs work(i) in parallel but feeds the results to consume(i, result) in
// strict index order, so floating-point accumulation does not depend on
// the thread count or the scheduling. Parked results stay few while work
// items have comparable cost.
template <typename Result>
void parallel_ordered(std::size_t count, unsigned threads,
                      const std::function<Result(std::size_t)>& work,
                      const std::function<void(std::size_t, Result&&)>& consume) {
    std::mutex mu;
    std::map<std::size_t, Result> parked;
    std::size_t next_to_consume = 0;

    parallel_for(count, threads, [&](std::size_t i) {
        Result r = work(i);
        std::lock_guard<std::mutex> lock(mu);
        parked.emplace(i, std::move(r));
        while (!parked.empty() && parked.begin()->first == next_to_consume) {
            auto it = parked.begin();
            consume(it->first, std::move(it->second));
            parked.erase(it);
            ++next_to_consume;
        }
    });
}

}  // namespace cdforest

#endif  // CDFOREST_PARALLEL_HPP
