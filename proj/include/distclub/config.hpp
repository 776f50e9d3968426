#pragma once

#include "environment.hpp"

#include <cstdint>
#include <string>

namespace distclub
{
    // One experiment. Hyperparameter defaults follow the evaluation setup the
    // four policies are normally run with.
    struct RunConfig
    {
        std::string algorithm; // linucb | club | dccb | distclub | random

        double alpha = 0.03;          // UCB exploration scale
        double beta = 2.0;            // cluster penalizing parameter
        double gamma = 0.7;           // cluster-partitioning threshold scale
        long long network_delay = 2000; // CLUB network update period
        long long buffer_size = 5000;   // DCCB buffer length L
        long long sigma = 2500;         // initial stage round split

        int n_workers = 1;
        std::uint64_t seed = 42;
        long long checkpoint_every = 1000;
        int repeat = 1;

        // 0 = automatic (all pairs up to 2000 users, sampled above).
        std::uint64_t max_pairs_per_update = 0;
        // DCCB: also write the peer's state on averaging (off = listing form).
        bool symmetric_exchange = false;
        // DistCLUB stage 3: use the user's own inverse for the bonus when the
        // personalized branch fires (off = cluster inverse in both branches).
        bool personal_bonus_matrix = false;
        // CLUB aggregate: "listing" (Mc = I + sum Mu) or "deduped"
        // (Mc = I + sum (Mu - I)).
        std::string cluster_agg_mode = "listing";

        bool use_synthetic = true;
        SyntheticConfig synthetic;
        std::string replay_path;

        std::string out = "metrics.csv";

        void validate() const
        {
            if (algorithm != "linucb" && algorithm != "club" && algorithm != "dccb" &&
                algorithm != "distclub" && algorithm != "random")
            {
                throw InputError("RunConfig: unknown algorithm '" + algorithm + "'");
            }
            if (alpha < 0.0 || beta <= 0.0 || gamma <= 0.0)
            {
                throw InputError("RunConfig: alpha must be >= 0, beta and gamma positive");
            }
            if (network_delay < 1 || buffer_size < 1 || sigma < 1)
            {
                throw InputError("RunConfig: network_delay, buffer_size and sigma must be positive");
            }
            if (n_workers < 1 || checkpoint_every < 1 || repeat < 1)
            {
                throw InputError("RunConfig: n_workers, checkpoint_every and repeat must be positive");
            }
            if (cluster_agg_mode != "listing" && cluster_agg_mode != "deduped")
            {
                throw InputError("RunConfig: cluster_agg_mode must be 'listing' or 'deduped'");
            }
            if (use_synthetic)
            {
                synthetic.validate();
            }
            else if (replay_path.empty())
            {
                throw InputError("RunConfig: replay environment needs a path");
            }
        }

        Environment build_environment() const
        {
            if (use_synthetic)
            {
                SyntheticConfig cfg = synthetic;
                cfg.seed = seed;
                return Environment::synthetic(cfg);
            }
            return Environment::load_replay(replay_path);
        }
    };

    // Parses "n=200,c=20,d=25,K=20,T=50000,noise=0.1" style synthetic specs.
    inline SyntheticConfig parse_synthetic_spec(const std::string &spec, std::uint64_t *seed_out = nullptr)
    {
        SyntheticConfig cfg;
        std::size_t start = 0;
        while (start < spec.size())
        {
            std::size_t comma = spec.find(',', start);
            if (comma == std::string::npos)
            {
                comma = spec.size();
            }
            const std::string part = spec.substr(start, comma - start);
            start = comma + 1;
            if (part.empty())
            {
                continue;
            }
            const std::size_t eq = part.find('=');
            if (eq == std::string::npos)
            {
                throw InputError("synthetic spec: expected key=value, got '" + part + "'");
            }
            const std::string key = part.substr(0, eq);
            const std::string value = part.substr(eq + 1);
            try
            {
                if (key == "n")
                {
                    cfg.n_users = std::stoi(value);
                }
                else if (key == "c")
                {
                    cfg.c_true = std::stoi(value);
                }
                else if (key == "d")
                {
                    cfg.d = std::stoi(value);
                }
                else if (key == "K")
                {
                    cfg.k_items = std::stoi(value);
                }
                else if (key == "T")
                {
                    cfg.n_interactions = std::stoll(value);
                }
                else if (key == "noise")
                {
                    cfg.noise = std::stod(value);
                }
                else if (key == "seed")
                {
                    const std::uint64_t s = std::stoull(value);
                    cfg.seed = s;
                    if (seed_out != nullptr)
                    {
                        *seed_out = s;
                    }
                }
                else
                {
                    throw InputError("synthetic spec: unknown key '" + key + "'");
                }
            }
            catch (const InputError &)
            {
                throw;
            }
            catch (const std::exception &)
            {
                throw InputError("synthetic spec: bad value for '" + key + "'");
            }
        }
        return cfg;
    }
}
