#pragma once

#include "runtime.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace distclub
{
    struct MetricsRow
    {
        long long t = 0; // interactions processed at this checkpoint
        double cum_reward = 0.0;
        double cum_regret = 0.0;
        int clusters = 0;
        std::uint64_t comm_bytes = 0;
    };

    struct MetricsLog
    {
        std::vector<MetricsRow> rows;
        std::map<std::string, long long> counters;

        long long final_t() const { return rows.empty() ? 0 : rows.back().t; }
        double final_reward() const { return rows.empty() ? 0.0 : rows.back().cum_reward; }
        double final_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
        std::uint64_t final_bytes() const { return rows.empty() ? 0 : rows.back().comm_bytes; }
    };

    // Bit-level equality, the determinism contract for parallel runs.
    inline bool bitwise_equal(const MetricsRow &a, const MetricsRow &b)
    {
        return a.t == b.t &&
               std::bit_cast<std::uint64_t>(a.cum_reward) == std::bit_cast<std::uint64_t>(b.cum_reward) &&
               std::bit_cast<std::uint64_t>(a.cum_regret) == std::bit_cast<std::uint64_t>(b.cum_regret) &&
               a.clusters == b.clusters && a.comm_bytes == b.comm_bytes;
    }

    inline bool bitwise_equal(const MetricsLog &a, const MetricsLog &b)
    {
        if (a.rows.size() != b.rows.size() || a.counters != b.counters)
        {
            return false;
        }
        for (std::size_t i = 0; i < a.rows.size(); ++i)
        {
            if (!bitwise_equal(a.rows[i], b.rows[i]))
            {
                return false;
            }
        }
        return true;
    }

    // Folds per-interaction outcomes, in stream order, into checkpoint rows.
    // Parallel phases hand their outputs back in input order, so the fold is
    // independent of scheduling.
    class MetricsAccumulator
    {
    public:
        MetricsAccumulator(long long checkpoint_every, const CommLedger *ledger)
            : every_(checkpoint_every), ledger_(ledger)
        {
            if (checkpoint_every < 1)
            {
                throw InputError("MetricsAccumulator: checkpoint_every must be >= 1");
            }
        }

        void set_cluster_count(int clusters) { clusters_ = clusters; }

        void on_interaction(double reward, double best)
        {
            cum_reward_ += reward;
            cum_regret_ += best - reward;
            ++processed_;
            if (processed_ % every_ == 0)
            {
                emit_row();
            }
        }

        // Final partial checkpoint for streams that do not divide evenly.
        MetricsLog finish()
        {
            if (processed_ % every_ != 0 && processed_ > 0)
            {
                emit_row();
            }
            return std::move(log_);
        }

        std::map<std::string, long long> &counters() { return log_.counters; }
        long long processed() const { return processed_; }

    private:
        void emit_row()
        {
            MetricsRow row;
            row.t = processed_;
            row.cum_reward = cum_reward_;
            row.cum_regret = cum_regret_;
            row.clusters = clusters_;
            row.comm_bytes = ledger_ != nullptr ? ledger_->total_bytes() : 0;
            log_.rows.push_back(row);
        }

        long long every_;
        const CommLedger *ledger_;
        long long processed_ = 0;
        double cum_reward_ = 0.0;
        double cum_regret_ = 0.0;
        int clusters_ = 0;
        MetricsLog log_;
    };
}
