#pragma once

#include "errors.hpp"
#include "rng.hpp"

#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace distclub
{
    // Stable key -> worker assignment for one stage. Keys are user ids for
    // interaction phases and cluster ids for cluster-parallel stages.
    struct ShardPlan
    {
        int n_workers = 1;

        explicit ShardPlan(int workers = 1) : n_workers(workers)
        {
            if (workers < 1)
            {
                throw InputError("ShardPlan: n_workers must be >= 1");
            }
        }

        int worker_of(std::uint64_t key) const
        {
            return static_cast<int>(hash_mix(0x5A17, key) % static_cast<std::uint64_t>(n_workers));
        }
    };

    // Append-only record of simulated communication. Every value is 8 bytes;
    // the ledger is the quantity the byte-volume comparisons are made of.
    class CommLedger
    {
    public:
        struct Event
        {
            std::uint64_t phase_id = 0;
            std::string kind;
            std::uint64_t value_count = 0;
            std::uint64_t bytes = 0;
        };

        void record(std::uint64_t phase_id, std::string kind, std::uint64_t value_count)
        {
            events_.push_back(Event{phase_id, std::move(kind), value_count, 8 * value_count});
            total_bytes_ += 8 * value_count;
        }

        const std::vector<Event> &events() const { return events_; }
        std::uint64_t total_bytes() const { return total_bytes_; }

        std::uint64_t total_bytes(const std::string &kind) const
        {
            std::uint64_t sum = 0;
            for (const Event &e : events_)
            {
                if (e.kind == kind)
                {
                    sum += e.bytes;
                }
            }
            return sum;
        }

        std::uint64_t phase_bytes(std::uint64_t phase_id) const
        {
            std::uint64_t sum = 0;
            for (const Event &e : events_)
            {
                if (e.phase_id == phase_id)
                {
                    sum += e.bytes;
                }
            }
            return sum;
        }

    private:
        std::vector<Event> events_;
        std::uint64_t total_bytes_ = 0;
    };

    // Parallel map over keyed work items with per-key serialization.
    //
    // Items sharing a key run on one worker in input order; items with
    // different keys may interleave. Outputs come back in input order, so for
    // tasks that only touch their own key's state the result is identical for
    // any worker count. A task failure aborts the phase with the error of the
    // smallest input index.
    template <typename In, typename Out, typename KeyFn, typename TaskFn>
    std::vector<Out> par_map_serialized(const ShardPlan &plan, const std::vector<In> &items,
                                        KeyFn key_of, TaskFn task)
    {
        std::vector<Out> outputs(items.size());
        if (plan.n_workers == 1 || items.size() <= 1)
        {
            for (std::size_t i = 0; i < items.size(); ++i)
            {
                outputs[i] = task(items[i]);
            }
            return outputs;
        }

        std::vector<std::vector<std::size_t>> by_worker(static_cast<std::size_t>(plan.n_workers));
        for (std::size_t i = 0; i < items.size(); ++i)
        {
            by_worker[static_cast<std::size_t>(plan.worker_of(key_of(items[i])))].push_back(i);
        }

        struct Failure
        {
            std::size_t index;
            std::exception_ptr error;
        };
        std::vector<std::vector<Failure>> failures(static_cast<std::size_t>(plan.n_workers));

        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(plan.n_workers));
        for (int w = 0; w < plan.n_workers; ++w)
        {
            threads.emplace_back([&, w]()
                                 {
                for (std::size_t i : by_worker[static_cast<std::size_t>(w)])
                {
                    try
                    {
                        outputs[i] = task(items[i]);
                    }
                    catch (...)
                    {
                        failures[static_cast<std::size_t>(w)].push_back(Failure{i, std::current_exception()});
                        return;
                    }
                } });
        }
        for (std::thread &t : threads)
        {
            t.join();
        }

        const Failure *first = nullptr;
        for (const auto &per_worker : failures)
        {
            for (const Failure &f : per_worker)
            {
                if (first == nullptr || f.index < first->index)
                {
                    first = &f;
                }
            }
        }
        if (first != nullptr)
        {
            std::rethrow_exception(first->error);
        }
        return outputs;
    }

    // Reduction over a fixed balanced pairing tree (split at the midpoint of
    // the index range). The pairing does not depend on the worker count, so
    // floating-point results are identical across runs.
    template <typename T, typename F>
    T tree_reduce(std::span<const T> values, F combine)
    {
        if (values.empty())
        {
            throw InputError("tree_reduce: empty input");
        }
        if (values.size() == 1)
        {
            return values[0];
        }
        const std::size_t mid = values.size() / 2;
        T left = tree_reduce(values.subspan(0, mid), combine);
        T right = tree_reduce(values.subspan(mid), combine);
        return combine(std::move(left), std::move(right));
    }

    template <typename T, typename F>
    T tree_reduce(const std::vector<T> &values, F combine)
    {
        return tree_reduce(std::span<const T>(values), combine);
    }
}
