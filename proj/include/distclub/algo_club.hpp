#pragma once

#include "algo_linucb.hpp"

#include <functional>
#include <vector>

namespace distclub
{
    // Sequential clustering of bandits. Recommendations come from the
    // interacting user's cluster aggregate (Mc, bc); the network is refreshed
    // every network_delay interactions.
    struct ClubState
    {
        struct ClusterAgg
        {
            bool valid = false;
            SpdMatrix mc;
            SpdMatrix mc_inv;
            RealVector bc;
            RealVector w;
        };

        std::vector<UserModel> models;
        UserGraph graph;
        Clustering clustering;
        std::vector<ClusterAgg> aggs;
        long long network_delay = 2000;
        double alpha = 0.03;
        double gamma = 0.7;
        std::string agg_mode = "listing";
        std::uint64_t max_pairs = 0;
        std::uint64_t seed = 0;
        long long steps_done = 0;
        long long recluster_count = 0;

        ClubState(int n, int d, const RunConfig &cfg)
            : models(static_cast<std::size_t>(n), UserModel(d)),
              graph(n),
              clustering(Clustering::single_cluster(n)),
              aggs(1),
              network_delay(cfg.network_delay),
              alpha(cfg.alpha),
              gamma(cfg.gamma),
              agg_mode(cfg.cluster_agg_mode),
              max_pairs(cfg.max_pairs_per_update),
              seed(cfg.seed)
        {
        }

        // Aggregate of one cluster, recomputed from the members on first use
        // after any member update. Summation runs in ascending member order so
        // the cached value is bit-identical to a from-scratch recomputation.
        const ClusterAgg &cluster_aggregate(int cluster_id)
        {
            ClusterAgg &agg = aggs[static_cast<std::size_t>(cluster_id)];
            if (!agg.valid)
            {
                const auto &members = clustering.clusters[static_cast<std::size_t>(cluster_id)];
                const int d = models.front().dim();
                agg.mc = SpdMatrix::identity(d);
                agg.bc.assign(static_cast<std::size_t>(d), 0.0);
                for (int u : members)
                {
                    agg.mc += models[static_cast<std::size_t>(u)].m;
                    add_scaled(agg.bc, 1.0, models[static_cast<std::size_t>(u)].b);
                }
                if (agg_mode == "deduped")
                {
                    // I + sum (Mu - I): drop the members' identity terms.
                    for (int i = 0; i < d; ++i)
                    {
                        agg.mc(i, i) -= static_cast<double>(members.size());
                    }
                }
                agg.w = spd_solve(agg.mc, agg.bc);
                agg.mc_inv = cholesky_inverse(agg.mc);
                agg.valid = true;
            }
            return agg;
        }

        void recluster()
        {
            const int n = graph.user_count();
            std::vector<RealVector> vectors(static_cast<std::size_t>(n));
            std::vector<std::uint64_t> occs(static_cast<std::size_t>(n));
            for (int u = 0; u < n; ++u)
            {
                vectors[static_cast<std::size_t>(u)] = user_vector(models[static_cast<std::size_t>(u)]);
                occs[static_cast<std::size_t>(u)] = models[static_cast<std::size_t>(u)].occ;
            }
            SplitMix64 pair_rng = substream(seed, stream_tag::kPairSample, static_cast<std::uint64_t>(recluster_count));
            update_network(vectors, occs, graph, gamma, UpdateNetworkOptions{max_pairs, &pair_rng});
            clustering = connected_components(graph);
            aggs.assign(static_cast<std::size_t>(clustering.cluster_count()), ClusterAgg{});
            ++recluster_count;
        }
    };

    struct ClubStepResult
    {
        int choice = 0;
        double reward = 0.0;
    };

    inline ClubStepResult club_step(ClubState &state, const Interaction &itx, const Environment &env)
    {
        const int user = itx.user_id;
        const int cluster_id = state.clustering.assignment[static_cast<std::size_t>(user)];
        const auto &agg = state.cluster_aggregate(cluster_id);
        UserModel &model = state.models[static_cast<std::size_t>(user)];
        const int choice = ucb_select(agg.w, model.occ, itx.ctx, agg.mc_inv, state.alpha);
        const double reward = env.reward(itx, choice);
        linear_update(model, itx.ctx.items[static_cast<std::size_t>(choice)], reward);
        state.aggs[static_cast<std::size_t>(cluster_id)].valid = false;
        ++state.steps_done;
        if (state.steps_done % state.network_delay == 0)
        {
            state.recluster();
        }
        return ClubStepResult{choice, reward};
    }

    struct ClubHooks
    {
        std::function<void(const ClubState &, long long)> after_step;
    };

    inline MetricsLog run_club(const Environment &env, const RunConfig &cfg, const ClubHooks &hooks = {})
    {
        ClubState state(env.n_users(), env.dim(), cfg);
        MetricsAccumulator acc(cfg.checkpoint_every, nullptr);
        acc.set_cluster_count(state.clustering.cluster_count());
        const long long T = env.size();
        for (long long t = 0; t < T; ++t)
        {
            const Interaction itx = env.interaction(t);
            const ClubStepResult step = club_step(state, itx, env);
            acc.set_cluster_count(state.clustering.cluster_count());
            acc.on_interaction(step.reward, env.best_reward(itx));
            if (hooks.after_step)
            {
                hooks.after_step(state, t);
            }
        }
        MetricsLog log = acc.finish();
        log.counters["reclusters"] = state.recluster_count;
        return log;
    }
}
