#pragma once

#include "bandit_core.hpp"
#include "rng.hpp"
#include "user_graph.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace distclub
{
    struct SyntheticConfig
    {
        int n_users = 20000;
        long long n_interactions = 4000000;
        int d = 25;
        int k_items = 20;
        int c_true = 20;
        double noise = 0.1;
        std::uint64_t seed = 42;

        void validate() const
        {
            if (n_users < 1 || c_true < 1 || c_true > n_users)
            {
                throw InputError("SyntheticConfig: need 1 <= c_true <= n_users");
            }
            if (d < 1 || k_items < 2 || n_interactions < 0)
            {
                throw InputError("SyntheticConfig: need d >= 1, K >= 2, T >= 0");
            }
            if (noise < 0.0 || noise > 1.0)
            {
                throw InputError("SyntheticConfig: noise must lie in [0, 1]");
            }
        }
    };

    struct Interaction
    {
        long long t = 0;
        int user_id = 0;
        ContextSet ctx;
        int positive_index = 0;
    };

    // A stream of interactions with reward oracles. Synthetic streams are
    // generated on demand: everything about interaction t derives from
    // (seed, t), so draws do not depend on the policy or on thread schedule.
    // Replay streams are finite, immutable, in file order.
    class Environment
    {
    public:
        static Environment synthetic(const SyntheticConfig &cfg)
        {
            cfg.validate();
            Environment env;
            env.synthetic_ = true;
            env.cfg_ = cfg;
            env.n_users_ = cfg.n_users;
            env.d_ = cfg.d;
            env.k_ = cfg.k_items;
            env.size_ = cfg.n_interactions;
            SplitMix64 rng = substream(cfg.seed, stream_tag::kTheta);
            env.thetas_.reserve(static_cast<std::size_t>(cfg.c_true));
            for (int j = 0; j < cfg.c_true; ++j)
            {
                env.thetas_.push_back(random_unit_vector(cfg.d, rng));
            }
            return env;
        }

        bool is_synthetic() const { return synthetic_; }
        int n_users() const { return n_users_; }
        int dim() const { return d_; }
        int items_per_context() const { return k_; }
        long long size() const { return size_; }
        const SyntheticConfig &synthetic_config() const { return cfg_; }

        // Users are assigned round-robin to the planted clusters.
        int true_cluster_of(int user) const { return user % cfg_.c_true; }

        Clustering planted_partition() const
        {
            Clustering c;
            c.assignment.resize(static_cast<std::size_t>(n_users_));
            c.clusters.resize(static_cast<std::size_t>(std::min(cfg_.c_true, n_users_)));
            for (int u = 0; u < n_users_; ++u)
            {
                const int j = true_cluster_of(u);
                c.assignment[static_cast<std::size_t>(u)] = j;
                c.clusters[static_cast<std::size_t>(j)].push_back(u);
            }
            return c;
        }

        // User of interaction t without materializing the context vectors.
        int user_of(long long t) const
        {
            if (!synthetic_)
            {
                return rows_[static_cast<std::size_t>(t)].user_id;
            }
            SplitMix64 rng = substream(cfg_.seed, stream_tag::kInteraction, static_cast<std::uint64_t>(t));
            return static_cast<int>(rng.below(static_cast<std::uint64_t>(n_users_)));
        }

        Interaction interaction(long long t) const
        {
            if (t < 0 || t >= size_)
            {
                throw InputError("Environment::interaction: index out of range");
            }
            Interaction itx;
            itx.t = t;
            if (!synthetic_)
            {
                const ReplayRow &row = rows_[static_cast<std::size_t>(t)];
                itx.user_id = row.user_id;
                itx.positive_index = row.positive_index;
                itx.ctx.items.resize(static_cast<std::size_t>(k_));
                for (int k = 0; k < k_; ++k)
                {
                    const std::size_t off = static_cast<std::size_t>(k) * static_cast<std::size_t>(d_);
                    itx.ctx.items[static_cast<std::size_t>(k)].assign(
                        row.features.begin() + static_cast<std::ptrdiff_t>(off),
                        row.features.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(d_)));
                }
                return itx;
            }
            SplitMix64 rng = substream(cfg_.seed, stream_tag::kInteraction, static_cast<std::uint64_t>(t));
            itx.user_id = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_users_)));
            itx.positive_index = static_cast<int>(rng.below(static_cast<std::uint64_t>(k_)));
            const RealVector &theta = thetas_[static_cast<std::size_t>(true_cluster_of(itx.user_id))];
            itx.ctx.items.resize(static_cast<std::size_t>(k_));
            for (int k = 0; k < k_; ++k)
            {
                RealVector item = random_unit_vector(d_, rng);
                if (k == itx.positive_index)
                {
                    // One item correlated with the hidden preference vector.
                    for (std::size_t i = 0; i < item.size(); ++i)
                    {
                        item[i] = 0.8 * theta[i] + 0.2 * item[i];
                    }
                    item = normalized(item);
                }
                itx.ctx.items[static_cast<std::size_t>(k)] = std::move(item);
            }
            return itx;
        }

        // Expected reward of an item under the planted model.
        double expected_reward(const Interaction &itx, int choice) const
        {
            const RealVector &theta = thetas_[static_cast<std::size_t>(true_cluster_of(itx.user_id))];
            double p = dot(theta, itx.ctx.items[static_cast<std::size_t>(choice)]);
            p = std::clamp(p, 0.0, 1.0);
            return p * (1.0 - cfg_.noise) + cfg_.noise * 0.5;
        }

        // Realized 0/1 reward. Replay: 1 iff the positive item was chosen.
        // Synthetic: Bernoulli with the expected reward above, drawn from the
        // per-interaction substream.
        double reward(const Interaction &itx, int choice) const
        {
            if (choice < 0 || choice >= itx.ctx.size())
            {
                throw InputError("Environment::reward: choice out of range");
            }
            if (!synthetic_)
            {
                return choice == itx.positive_index ? 1.0 : 0.0;
            }
            const double p = expected_reward(itx, choice);
            SplitMix64 rng = substream(cfg_.seed, stream_tag::kReward, static_cast<std::uint64_t>(itx.t));
            return rng.uniform01() < p ? 1.0 : 0.0;
        }

        // Best attainable expected reward for the interaction (regret reference).
        double best_reward(const Interaction &itx) const
        {
            if (!synthetic_)
            {
                return 1.0;
            }
            double best = 0.0;
            for (int k = 0; k < itx.ctx.size(); ++k)
            {
                best = std::max(best, expected_reward(itx, k));
            }
            return best;
        }

        static Environment load_replay(const std::string &path);
        void write_replay(const std::string &path) const;

    private:
        struct ReplayRow
        {
            long long t = 0;
            int user_id = 0;
            int positive_index = 0;
            std::vector<double> features; // K * d, row-major items
        };

        bool synthetic_ = false;
        SyntheticConfig cfg_;
        int n_users_ = 0;
        int d_ = 0;
        int k_ = 0;
        long long size_ = 0;
        std::vector<RealVector> thetas_;
        std::vector<ReplayRow> rows_;
    };

    // Uniform choice over the context's items.
    inline int random_policy(const ContextSet &ctx, SplitMix64 &rng)
    {
        if (ctx.items.empty())
        {
            throw InputError("random_policy: empty context");
        }
        return static_cast<int>(rng.below(static_cast<std::uint64_t>(ctx.size())));
    }

    namespace detail
    {
        inline std::vector<std::string> split_csv_line(const std::string &line)
        {
            std::vector<std::string> out;
            std::size_t start = 0;
            while (true)
            {
                const std::size_t comma = line.find(',', start);
                if (comma == std::string::npos)
                {
                    out.push_back(line.substr(start));
                    break;
                }
                out.push_back(line.substr(start, comma - start));
                start = comma + 1;
            }
            return out;
        }

        inline long long parse_ll(const std::string &s, const char *what, int line_no)
        {
            try
            {
                std::size_t pos = 0;
                const long long v = std::stoll(s, &pos);
                if (pos != s.size())
                {
                    throw std::invalid_argument(s);
                }
                return v;
            }
            catch (const std::exception &)
            {
                throw DataError(std::string("replay parse error at line ") + std::to_string(line_no) +
                                ": bad " + what + " '" + s + "'");
            }
        }

        inline double parse_double(const std::string &s, int line_no)
        {
            try
            {
                std::size_t pos = 0;
                const double v = std::stod(s, &pos);
                if (pos != s.size())
                {
                    throw std::invalid_argument(s);
                }
                return v;
            }
            catch (const std::exception &)
            {
                throw DataError(std::string("replay parse error at line ") + std::to_string(line_no) +
                                ": bad float '" + s + "'");
            }
        }
    }

    // Replay CSV: header line `<n_users>,<d>,<K>`, then one line per
    // interaction: t,user_id,positive_index,x_0_0,...,x_{K-1}_{d-1}.
    // UTF-8, LF line endings, floats written with round-trip precision.
    inline Environment Environment::load_replay(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw DataError("replay: cannot open '" + path + "'");
        }
        Environment env;
        env.synthetic_ = false;
        std::string line;
        if (!std::getline(in, line))
        {
            throw DataError("replay: empty file '" + path + "'");
        }
        auto header = detail::split_csv_line(line);
        if (header.size() != 3)
        {
            throw DataError("replay schema error: header must be '<n_users>,<d>,<K>'");
        }
        env.n_users_ = static_cast<int>(detail::parse_ll(header[0], "user count", 1));
        env.d_ = static_cast<int>(detail::parse_ll(header[1], "d", 1));
        env.k_ = static_cast<int>(detail::parse_ll(header[2], "K", 1));
        if (env.n_users_ < 1 || env.d_ < 1 || env.k_ < 1)
        {
            throw DataError("replay schema error: header values must be positive");
        }
        const std::size_t expected_cols = 3 + static_cast<std::size_t>(env.k_) * static_cast<std::size_t>(env.d_);
        int line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
            {
                continue;
            }
            auto cols = detail::split_csv_line(line);
            if (cols.size() != expected_cols)
            {
                throw DataError("replay schema error at line " + std::to_string(line_no) +
                                ": expected " + std::to_string(expected_cols) + " columns, got " +
                                std::to_string(cols.size()));
            }
            ReplayRow row;
            row.t = detail::parse_ll(cols[0], "t", line_no);
            row.user_id = static_cast<int>(detail::parse_ll(cols[1], "user_id", line_no));
            row.positive_index = static_cast<int>(detail::parse_ll(cols[2], "positive_index", line_no));
            if (row.user_id < 0 || row.user_id >= env.n_users_)
            {
                throw DataError("replay schema error at line " + std::to_string(line_no) + ": user_id out of range");
            }
            if (row.positive_index < 0 || row.positive_index >= env.k_)
            {
                throw DataError("replay schema error at line " + std::to_string(line_no) + ": positive_index out of range");
            }
            row.features.reserve(expected_cols - 3);
            for (std::size_t i = 3; i < cols.size(); ++i)
            {
                row.features.push_back(detail::parse_double(cols[i], line_no));
            }
            env.rows_.push_back(std::move(row));
        }
        env.size_ = static_cast<long long>(env.rows_.size());
        return env;
    }

    inline void Environment::write_replay(const std::string &path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            throw DataError("replay: cannot write '" + path + "'");
        }
        char buf[64];
        out << n_users_ << ',' << d_ << ',' << k_ << '\n';
        for (long long t = 0; t < size_; ++t)
        {
            const Interaction itx = interaction(t);
            out << (synthetic_ ? t : rows_[static_cast<std::size_t>(t)].t) << ',' << itx.user_id << ','
                << itx.positive_index;
            for (const RealVector &item : itx.ctx.items)
            {
                for (double v : item)
                {
                    std::snprintf(buf, sizeof(buf), "%.17g", v);
                    out << ',' << buf;
                }
            }
            out << '\n';
        }
    }
}
