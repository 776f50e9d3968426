#pragma once

#include "algo_linucb.hpp"

#include <deque>
#include <optional>
#include <utility>
#include <vector>

namespace distclub
{
    // One buffered (matrix-update, vector-update) pair, stored as a sum of
    // coef * (x x^T, r x) terms. Fresh entries hold one term; averaging scales
    // and concatenates; an empty term list is the zero entry. Entries collapse
    // to a dense payload if repeated averaging grows the term list too far.
    struct BufferEntry
    {
        struct Term
        {
            double coef = 1.0;
            RealVector x;
            double reward = 0.0;
        };

        std::vector<Term> terms;
        std::optional<std::pair<SpdMatrix, RealVector>> dense;

        bool is_zero() const { return terms.empty() && !dense.has_value(); }

        static BufferEntry single(const RealVector &x, double reward)
        {
            BufferEntry e;
            e.terms.push_back(Term{1.0, x, reward});
            return e;
        }

        // Adds the entry into (m, b). Matrix additions keep exact symmetry.
        void apply(SpdMatrix &m, RealVector &b) const
        {
            if (dense)
            {
                m += dense->first;
                add_scaled(b, 1.0, dense->second);
            }
            for (const Term &t : terms)
            {
                m = rank1_update(m, t.x, t.coef);
                add_scaled(b, t.coef * t.reward, t.x);
            }
        }

        void materialize(int d)
        {
            std::pair<SpdMatrix, RealVector> acc{SpdMatrix(d), RealVector(static_cast<std::size_t>(d), 0.0)};
            if (dense)
            {
                acc = std::move(*dense);
            }
            apply_terms_(acc.first, acc.second);
            terms.clear();
            dense = std::move(acc);
        }

        static BufferEntry average(const BufferEntry &a, const BufferEntry &b, int d)
        {
            BufferEntry out;
            if (a.dense || b.dense || a.terms.size() + b.terms.size() > 64)
            {
                BufferEntry ca = a;
                BufferEntry cb = b;
                ca.materialize(d);
                cb.materialize(d);
                std::pair<SpdMatrix, RealVector> acc{SpdMatrix(d), RealVector(static_cast<std::size_t>(d), 0.0)};
                halved_add_(acc, ca.dense.value());
                halved_add_(acc, cb.dense.value());
                out.dense = std::move(acc);
                return out;
            }
            out.terms.reserve(a.terms.size() + b.terms.size());
            for (const Term &t : a.terms)
            {
                out.terms.push_back(Term{0.5 * t.coef, t.x, t.reward});
            }
            for (const Term &t : b.terms)
            {
                out.terms.push_back(Term{0.5 * t.coef, t.x, t.reward});
            }
            return out;
        }

    private:
        void apply_terms_(SpdMatrix &m, RealVector &b) const
        {
            for (const Term &t : terms)
            {
                m = rank1_update(m, t.x, t.coef);
                add_scaled(b, t.coef * t.reward, t.x);
            }
        }

        static void halved_add_(std::pair<SpdMatrix, RealVector> &acc,
                                const std::pair<SpdMatrix, RealVector> &v)
        {
            const int d = acc.first.dim();
            for (int i = 0; i < d; ++i)
            {
                for (int j = i; j < d; ++j)
                {
                    const double val = acc.first(i, j) + 0.5 * v.first(i, j);
                    acc.first(i, j) = val;
                    acc.first(j, i) = val;
                }
            }
            add_scaled(acc.second, 0.5, v.second);
        }
    };

    // Fixed-length FIFO of buffered updates, initialized to zeros. The leading
    // zero block is stored as a count, so untouched buffer space costs nothing.
    class UpdateBuffer
    {
    public:
        explicit UpdateBuffer(std::uint64_t capacity) : capacity_(capacity), zeros_(capacity) {}

        std::uint64_t capacity() const { return capacity_; }

        // Dequeues the head entry and enqueues a new one; length stays fixed.
        BufferEntry pop_push(BufferEntry e)
        {
            BufferEntry out;
            if (zeros_ > 0)
            {
                --zeros_;
            }
            else
            {
                out = std::move(entries_.front());
                entries_.pop_front();
            }
            entries_.push_back(std::move(e));
            return out;
        }

        void reset()
        {
            zeros_ = capacity_;
            entries_.clear();
        }

        // Entry-wise average with a peer buffer, written into this buffer.
        void average_with(const UpdateBuffer &other, int d)
        {
            const std::uint64_t shared_zeros = std::min(zeros_, other.zeros_);
            std::deque<BufferEntry> merged;
            for (std::uint64_t k = shared_zeros; k < capacity_; ++k)
            {
                const BufferEntry *mine = k < zeros_ ? nullptr : &entries_[static_cast<std::size_t>(k - zeros_)];
                const BufferEntry *theirs = k < other.zeros_ ? nullptr : &other.entries_[static_cast<std::size_t>(k - other.zeros_)];
                static const BufferEntry kZero{};
                merged.push_back(BufferEntry::average(mine != nullptr ? *mine : kZero,
                                                      theirs != nullptr ? *theirs : kZero, d));
            }
            zeros_ = shared_zeros;
            entries_ = std::move(merged);
        }

        // Sum of all queued updates, for bookkeeping checks.
        void accumulate(SpdMatrix &m, RealVector &b) const
        {
            for (const BufferEntry &e : entries_)
            {
                e.apply(m, b);
            }
        }

    private:
        std::uint64_t capacity_ = 0;
        std::uint64_t zeros_ = 0;
        std::deque<BufferEntry> entries_;
    };

    // Per-user DCCB state: active copies (mw, bw) feed recommendations and lag
    // behind by the buffer length; local copies absorb updates immediately and
    // feed the exchange-phase similarity tests.
    struct DccbUserState
    {
        SpdMatrix mw;
        SpdMatrix mw_inv;
        RealVector bw;
        SpdMatrix mw_local;
        RealVector bw_local;
        UpdateBuffer buffer;
        std::uint64_t occ = 0;

        DccbUserState(int d, std::uint64_t buffer_len)
            : mw(SpdMatrix::identity(d)),
              mw_inv(SpdMatrix::identity(d)),
              bw(static_cast<std::size_t>(d), 0.0),
              mw_local(SpdMatrix::identity(d)),
              bw_local(static_cast<std::size_t>(d), 0.0),
              buffer(buffer_len)
        {
        }

        void reset_active()
        {
            const int d = mw.dim();
            mw = SpdMatrix::identity(d);
            mw_inv = SpdMatrix::identity(d);
            bw.assign(static_cast<std::size_t>(d), 0.0);
            buffer.reset();
        }
    };

    struct DccbStepResult
    {
        int choice = 0;
        double reward = 0.0;
    };

    inline DccbStepResult dccb_interaction(DccbUserState &state, const Interaction &itx,
                                           const Environment &env, double alpha)
    {
        const RealVector w = spd_solve(state.mw, state.bw);
        const int choice = ucb_select(w, state.occ, itx.ctx, state.mw_inv, alpha);
        const double reward = env.reward(itx, choice);
        const RealVector &x = itx.ctx.items[static_cast<std::size_t>(choice)];

        state.mw_local = rank1_update(state.mw_local, x);
        add_scaled(state.bw_local, reward, x);

        const BufferEntry popped = state.buffer.pop_push(BufferEntry::single(x, reward));
        if (!popped.is_zero())
        {
            if (popped.dense)
            {
                popped.apply(state.mw, state.bw);
                state.mw_inv = cholesky_inverse(state.mw);
            }
            else
            {
                for (const BufferEntry::Term &t : popped.terms)
                {
                    state.mw = rank1_update(state.mw, t.x, t.coef);
                    state.mw_inv = inv_rank1_update(state.mw_inv, t.x, t.coef);
                    add_scaled(state.bw, t.coef * t.reward, t.x);
                }
            }
        }
        state.occ += 1;
        return DccbStepResult{choice, reward};
    }

    // True once any user has seen buffer_len interactions since the last phase.
    inline bool dccb_phase_trigger(std::span<const long long> since_phase_counts, long long buffer_len)
    {
        for (long long c : since_phase_counts)
        {
            if (c >= buffer_len)
            {
                return true;
            }
        }
        return false;
    }

    struct DccbExchangeStats
    {
        long long pairs = 0;
        long long edges_removed = 0;
        long long averages = 0;
    };

    // One exchange phase: users, in a shuffled order, each obtain the buffers
    // of one random remaining neighbor. Dissimilar pairs lose their edge and
    // both endpoints reset; pairs with identical neighbor sets average, with
    // only the initiating user written (the symmetric variant is opt-in).
    inline DccbExchangeStats dccb_peer_exchange(std::vector<DccbUserState> &states, UserGraph &graph,
                                                double gamma, SplitMix64 &rng, CommLedger &ledger,
                                                std::uint64_t phase_id, bool symmetric = false)
    {
        const int n = graph.user_count();
        const int d = states.front().mw.dim();
        const std::uint64_t L = states.front().buffer.capacity();
        const std::uint64_t values_per_pair =
            (L + 1) * (static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(d));
        DccbExchangeStats stats;
        const std::vector<int> order = shuffled_order(n, rng);
        for (int i : order)
        {
            const int degree = graph.degree(i);
            if (degree == 0)
            {
                continue;
            }
            const int peer = graph.neighbor_at(i, static_cast<int>(rng.below(static_cast<std::uint64_t>(degree))));
            ledger.record(phase_id, "dccb_pair_exchange", values_per_pair);
            ++stats.pairs;

            DccbUserState &si = states[static_cast<std::size_t>(i)];
            DccbUserState &sp = states[static_cast<std::size_t>(peer)];
            const RealVector w = spd_solve(si.mw_local, si.bw_local);
            const RealVector v = spd_solve(sp.mw_local, sp.bw_local);
            if (distance2(w, v) >= gamma * (confidence_bound(sp.occ) + confidence_bound(si.occ)))
            {
                graph.remove_edge(i, peer);
                si.reset_active();
                sp.reset_active();
                ++stats.edges_removed;
            }
            else if (graph.neighbors_equal_excluding_pair(i, peer))
            {
                si.buffer.average_with(sp.buffer, d);
                for (int r = 0; r < d; ++r)
                {
                    for (int c = r; c < d; ++c)
                    {
                        const double val = 0.5 * (si.mw(r, c) + sp.mw(r, c));
                        si.mw(r, c) = val;
                        si.mw(c, r) = val;
                    }
                }
                for (std::size_t k = 0; k < si.bw.size(); ++k)
                {
                    si.bw[k] = 0.5 * (si.bw[k] + sp.bw[k]);
                }
                si.mw_inv = cholesky_inverse(si.mw);
                if (symmetric)
                {
                    sp.buffer = si.buffer;
                    sp.mw = si.mw;
                    sp.bw = si.bw;
                    sp.mw_inv = si.mw_inv;
                }
                ++stats.averages;
            }
        }
        return stats;
    }

    inline MetricsLog run_dccb(const Environment &env, const RunConfig &cfg)
    {
        const int n = env.n_users();
        const int d = env.dim();
        const long long L = cfg.buffer_size;
        std::vector<DccbUserState> states(static_cast<std::size_t>(n),
                                          DccbUserState(d, static_cast<std::uint64_t>(L)));
        UserGraph graph(n);
        CommLedger ledger;
        MetricsAccumulator acc(cfg.checkpoint_every, &ledger);
        acc.set_cluster_count(1);
        const ShardPlan plan(cfg.n_workers);
        const long long T = env.size();

        long long cursor = 0;
        std::uint64_t phase_id = 0;
        long long exchange_phases = 0;
        long long exchange_pairs = 0;
        long long edges_removed = 0;
        while (cursor < T)
        {
            // The phase boundary depends only on the user sequence, so it can
            // be located up front and the slice processed in parallel.
            std::vector<long long> counts(static_cast<std::size_t>(n), 0);
            long long end = cursor;
            bool triggered = false;
            while (end < T)
            {
                const int u = env.user_of(end);
                ++end;
                if (++counts[static_cast<std::size_t>(u)] >= L)
                {
                    triggered = true;
                    break;
                }
            }

            const auto ts = detail::index_range(cursor, end - cursor);
            const auto outcomes = par_map_serialized<long long, StepOutcome>(
                plan, ts,
                [&](long long t) { return static_cast<std::uint64_t>(env.user_of(t)); },
                [&](long long t) -> StepOutcome
                {
                    const Interaction itx = env.interaction(t);
                    DccbUserState &state = states[static_cast<std::size_t>(itx.user_id)];
                    const DccbStepResult step = dccb_interaction(state, itx, env, cfg.alpha);
                    return StepOutcome{step.reward, env.best_reward(itx)};
                });
            for (const StepOutcome &o : outcomes)
            {
                acc.on_interaction(o.reward, o.best);
            }
            cursor = end;

            if (triggered)
            {
                ++phase_id;
                SplitMix64 rng = substream(cfg.seed, stream_tag::kDccbPhase, phase_id);
                const DccbExchangeStats stats =
                    dccb_peer_exchange(states, graph, cfg.gamma, rng, ledger, phase_id, cfg.symmetric_exchange);
                ++exchange_phases;
                exchange_pairs += stats.pairs;
                edges_removed += stats.edges_removed;
                acc.set_cluster_count(connected_components(graph).cluster_count());
            }
        }

        MetricsLog log = acc.finish();
        log.counters["exchange_phases"] = exchange_phases;
        log.counters["exchange_pairs"] = exchange_pairs;
        log.counters["edges_removed"] = edges_removed;
        return log;
    }
}
