#pragma once

#include "linalg.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace distclub
{
    // Feature vectors of the items recommendable in one interaction.
    struct ContextSet
    {
        std::vector<RealVector> items;

        int size() const { return static_cast<int>(items.size()); }
        int dim() const { return items.empty() ? 0 : static_cast<int>(items.front().size()); }
    };

    // Per-user linear bandit state: M = I + sum of x x^T over past updates,
    // b = sum of reward-weighted contexts, minv the maintained inverse of M.
    // minv is rebuilt from M via Cholesky every kInverseRefreshPeriod rank-1
    // updates to bound Sherman-Morrison drift.
    struct UserModel
    {
        static constexpr std::uint32_t kInverseRefreshPeriod = 10000;

        SpdMatrix m;
        SpdMatrix minv;
        RealVector b;
        std::uint64_t occ = 0;
        std::uint32_t updates_since_refresh = 0;

        UserModel() = default;

        explicit UserModel(int dim)
            : m(SpdMatrix::identity(dim)),
              minv(SpdMatrix::identity(dim)),
              b(static_cast<std::size_t>(dim), 0.0)
        {
        }

        int dim() const { return m.dim(); }
    };

    // Ridge estimate of the user's preference vector, v = M^-1 b.
    inline RealVector user_vector(const UserModel &model)
    {
        return spd_solve(model.m, model.b);
    }

    // Exploration radius as a function of the interaction count. Strictly
    // decreasing; CB(0) = 1.
    inline double confidence_bound(std::uint64_t occ)
    {
        const double n = 1.0 + static_cast<double>(occ);
        return std::sqrt((1.0 + std::log(n)) / n);
    }

    // UCB arm selection: argmax over items of
    //   k . w + alpha * sqrt(k^T minv k) * sqrt(log(1 + occ))
    // Ties break toward the lowest item index.
    inline int ucb_select(const RealVector &w, std::uint64_t occ, const ContextSet &ctx,
                          const SpdMatrix &minv, double alpha)
    {
        if (ctx.items.empty())
        {
            throw InputError("ucb_select: empty context");
        }
        const double log_term = std::sqrt(std::log(1.0 + static_cast<double>(occ)));
        int best = 0;
        double best_score = 0.0;
        for (int k = 0; k < ctx.size(); ++k)
        {
            const RealVector &item = ctx.items[static_cast<std::size_t>(k)];
            if (item.size() != w.size() || static_cast<int>(item.size()) != minv.dim())
            {
                throw InputError("ucb_select: item dimension mismatch");
            }
            const double estimate = dot(item, w);
            double quad = dot(item, minv.multiply(item));
            if (quad < 0.0)
            {
                quad = 0.0;
            }
            const double score = estimate + alpha * std::sqrt(quad) * log_term;
            if (k == 0 || score > best_score)
            {
                best = k;
                best_score = score;
            }
        }
        return best;
    }

    // Standard linear-bandit update: M += x x^T, b += reward * x, occ += 1.
    inline void linear_update(UserModel &model, const RealVector &x, double reward)
    {
        if (static_cast<int>(x.size()) != model.dim())
        {
            throw InputError("linear_update: dim mismatch");
        }
        model.m = rank1_update(model.m, x);
        add_scaled(model.b, reward, x);
        model.occ += 1;
        model.updates_since_refresh += 1;
        if (model.updates_since_refresh >= UserModel::kInverseRefreshPeriod)
        {
            model.minv = cholesky_inverse(model.m);
            model.updates_since_refresh = 0;
        }
        else
        {
            model.minv = inv_rank1_update(model.minv, x);
        }
    }
}
