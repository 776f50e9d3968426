#pragma once

#include "config.hpp"
#include "metrics.hpp"

#include <numeric>
#include <vector>

namespace distclub
{
    struct StepOutcome
    {
        double reward = 0.0;
        double best = 0.0;
    };

    namespace detail
    {
        inline std::vector<long long> index_range(long long start, long long len)
        {
            std::vector<long long> ts(static_cast<std::size_t>(len));
            std::iota(ts.begin(), ts.end(), start);
            return ts;
        }
    }

    // Independent per-user linear bandits, no information sharing. Interactions
    // of distinct users run in parallel; a user's own interactions stay in
    // stream order.
    inline MetricsLog run_linucb(const Environment &env, const RunConfig &cfg)
    {
        const int d = env.dim();
        std::vector<UserModel> models(static_cast<std::size_t>(env.n_users()), UserModel(d));
        MetricsAccumulator acc(cfg.checkpoint_every, nullptr);
        const ShardPlan plan(cfg.n_workers);
        const long long T = env.size();
        constexpr long long kChunk = 1 << 18;
        for (long long start = 0; start < T; start += kChunk)
        {
            const auto ts = detail::index_range(start, std::min(kChunk, T - start));
            const auto outcomes = par_map_serialized<long long, StepOutcome>(
                plan, ts,
                [&](long long t) { return static_cast<std::uint64_t>(env.user_of(t)); },
                [&](long long t) -> StepOutcome
                {
                    const Interaction itx = env.interaction(t);
                    UserModel &model = models[static_cast<std::size_t>(itx.user_id)];
                    const RealVector w = user_vector(model);
                    const int choice = ucb_select(w, model.occ, itx.ctx, model.minv, cfg.alpha);
                    const double r = env.reward(itx, choice);
                    linear_update(model, itx.ctx.items[static_cast<std::size_t>(choice)], r);
                    return StepOutcome{r, env.best_reward(itx)};
                });
            for (const StepOutcome &o : outcomes)
            {
                acc.on_interaction(o.reward, o.best);
            }
        }
        return acc.finish();
    }

    // Uniform random baseline; keeps no model.
    inline MetricsLog run_random(const Environment &env, const RunConfig &cfg)
    {
        MetricsAccumulator acc(cfg.checkpoint_every, nullptr);
        const ShardPlan plan(cfg.n_workers);
        const long long T = env.size();
        constexpr long long kChunk = 1 << 18;
        for (long long start = 0; start < T; start += kChunk)
        {
            const auto ts = detail::index_range(start, std::min(kChunk, T - start));
            const auto outcomes = par_map_serialized<long long, StepOutcome>(
                plan, ts,
                [&](long long t) { return static_cast<std::uint64_t>(t); },
                [&](long long t) -> StepOutcome
                {
                    const Interaction itx = env.interaction(t);
                    SplitMix64 rng = substream(cfg.seed, stream_tag::kRandomPolicy, static_cast<std::uint64_t>(t));
                    const int choice = random_policy(itx.ctx, rng);
                    return StepOutcome{env.reward(itx, choice), env.best_reward(itx)};
                });
            for (const StepOutcome &o : outcomes)
            {
                acc.on_interaction(o.reward, o.best);
            }
        }
        return acc.finish();
    }
}
