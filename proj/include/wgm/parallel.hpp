#ifndef WGM_PARALLEL_HPP
#define WGM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wgm
{

inline constexpr const char *kWorkersEnv = "WGM_WORKERS";

// Worker count from WGM_WORKERS, falling back to the hardware concurrency.
inline std::size_t default_worker_count()
{
    if (const char *env = std::getenv(kWorkersEnv))
    {
        try
        {
            const long value = std::stol(env);
            if (value > 0)
            {
                return std::size_t(value);
            }
        }
        catch (const std::exception &)
        {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, count). Results must be written by index; the
// first exception thrown by any worker is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, Body &&body, std::size_t workers = 0)
{
    if (workers == 0)
    {
        workers = default_worker_count();
    }
    workers = std::min(workers, count);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            body(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
        pool.emplace_back(run);
    }
    for (auto &t : pool)
    {
        t.join();
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

} // namespace wgm

#endif
