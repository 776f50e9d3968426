#pragma once

#include "bandit_core.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

namespace distclub
{
    // Undirected similarity graph over users. Starts complete; edges are only
    // ever deleted, so the graph is stored as per-vertex sets of deleted
    // neighbors. No self-loops.
    class UserGraph
    {
    public:
        UserGraph() = default;

        explicit UserGraph(int n) : n_(n), deleted_adj_(static_cast<std::size_t>(n))
        {
            if (n < 1)
            {
                throw InputError("UserGraph: user count must be >= 1");
            }
        }

        int user_count() const { return n_; }
        std::uint64_t deleted_edge_count() const { return deleted_edges_; }

        bool has_edge(int u, int v) const
        {
            if (u == v)
            {
                return false;
            }
            return deleted_adj_[static_cast<std::size_t>(u)].count(v) == 0;
        }

        void remove_edge(int u, int v)
        {
            if (u == v)
            {
                return;
            }
            if (deleted_adj_[static_cast<std::size_t>(u)].insert(v).second)
            {
                deleted_adj_[static_cast<std::size_t>(v)].insert(u);
                ++deleted_edges_;
            }
        }

        int degree(int u) const
        {
            return n_ - 1 - static_cast<int>(deleted_adj_[static_cast<std::size_t>(u)].size());
        }

        // k-th remaining neighbor of u in ascending vertex order.
        int neighbor_at(int u, int k) const
        {
            for (int v = 0; v < n_; ++v)
            {
                if (v != u && has_edge(u, v))
                {
                    if (k == 0)
                    {
                        return v;
                    }
                    --k;
                }
            }
            throw InputError("UserGraph::neighbor_at: index out of range");
        }

        // Whether u and v see the same neighbors outside the pair {u, v}.
        // Equivalent to comparing the deleted sets with u and v masked out.
        bool neighbors_equal_excluding_pair(int u, int v) const
        {
            const auto &du = deleted_adj_[static_cast<std::size_t>(u)];
            const auto &dv = deleted_adj_[static_cast<std::size_t>(v)];
            for (int w : du)
            {
                if (w != u && w != v && dv.count(w) == 0)
                {
                    return false;
                }
            }
            for (int w : dv)
            {
                if (w != u && w != v && du.count(w) == 0)
                {
                    return false;
                }
            }
            return true;
        }

    private:
        int n_ = 0;
        std::vector<std::unordered_set<int>> deleted_adj_;
        std::uint64_t deleted_edges_ = 0;
    };

    // A partition of the users. Cluster ids are dense from 0 and assigned in
    // order of each cluster's smallest member, so ids are reproducible.
    struct Clustering
    {
        std::vector<int> assignment;
        std::vector<std::vector<int>> clusters;

        int cluster_count() const { return static_cast<int>(clusters.size()); }

        static Clustering single_cluster(int n)
        {
            Clustering c;
            c.assignment.assign(static_cast<std::size_t>(n), 0);
            c.clusters.resize(1);
            c.clusters[0].resize(static_cast<std::size_t>(n));
            for (int u = 0; u < n; ++u)
            {
                c.clusters[0][static_cast<std::size_t>(u)] = u;
            }
            return c;
        }

        // Equality as a partition (cluster ids are canonical by construction).
        bool same_partition(const Clustering &o) const
        {
            return clusters == o.clusters;
        }
    };

    // Dissimilarity test behind edge deletion:
    //   ||wu - wv||_2 >= gamma * (CB(occ_u) + CB(occ_v))
    inline bool should_disconnect(const RealVector &wu, const RealVector &wv,
                                  std::uint64_t occ_u, std::uint64_t occ_v, double gamma)
    {
        if (wu.size() != wv.size())
        {
            throw InputError("should_disconnect: dim mismatch");
        }
        return distance2(wu, wv) >= gamma * (confidence_bound(occ_u) + confidence_bound(occ_v));
    }

    struct UpdateNetworkOptions
    {
        // 0 means automatic: all pairs for n <= 2000, else a uniform sample of
        // 2e6 pairs per update.
        std::uint64_t max_pairs = 0;
        SplitMix64 *pair_rng = nullptr;
    };

    // Tests edges against should_disconnect on the supplied user vectors and
    // removes the failing ones. For large n the candidate pairs are sampled.
    inline void update_network(std::span<const RealVector> user_vectors,
                               std::span<const std::uint64_t> occs,
                               UserGraph &g, double gamma,
                               const UpdateNetworkOptions &opts = {})
    {
        const int n = g.user_count();
        const bool all_pairs = opts.max_pairs == 0 ? n <= 2000 : false;
        if (all_pairs || opts.max_pairs >= static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2)
        {
            for (int u = 0; u < n; ++u)
            {
                for (int v = u + 1; v < n; ++v)
                {
                    if (g.has_edge(u, v) &&
                        should_disconnect(user_vectors[static_cast<std::size_t>(u)],
                                          user_vectors[static_cast<std::size_t>(v)],
                                          occs[static_cast<std::size_t>(u)],
                                          occs[static_cast<std::size_t>(v)], gamma))
                    {
                        g.remove_edge(u, v);
                    }
                }
            }
            return;
        }
        const std::uint64_t samples = opts.max_pairs == 0 ? 2000000ULL : opts.max_pairs;
        SplitMix64 local(0);
        SplitMix64 &rng = opts.pair_rng != nullptr ? *opts.pair_rng : local;
        for (std::uint64_t s = 0; s < samples; ++s)
        {
            const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            if (u == v)
            {
                continue;
            }
            if (g.has_edge(u, v) &&
                should_disconnect(user_vectors[static_cast<std::size_t>(u)],
                                  user_vectors[static_cast<std::size_t>(v)],
                                  occs[static_cast<std::size_t>(u)],
                                  occs[static_cast<std::size_t>(v)], gamma))
            {
                g.remove_edge(u, v);
            }
        }
    }

    namespace detail
    {
        struct UnionFind
        {
            std::vector<int> parent;

            explicit UnionFind(int n) : parent(static_cast<std::size_t>(n))
            {
                for (int i = 0; i < n; ++i)
                {
                    parent[static_cast<std::size_t>(i)] = i;
                }
            }

            int find(int x)
            {
                while (parent[static_cast<std::size_t>(x)] != x)
                {
                    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                    x = parent[static_cast<std::size_t>(x)];
                }
                return x;
            }

            void unite(int a, int b)
            {
                a = find(a);
                b = find(b);
                if (a != b)
                {
                    if (a > b)
                    {
                        std::swap(a, b);
                    }
                    parent[static_cast<std::size_t>(b)] = a;
                }
            }
        };
    }

    // Connected components by union-find. Cluster ids follow ascending smallest
    // member, independent of edge iteration order.
    inline Clustering connected_components(const UserGraph &g)
    {
        const int n = g.user_count();
        detail::UnionFind uf(n);
        bool single_component = false;
        for (int u = 0; u < n && !single_component; ++u)
        {
            // A vertex with no deletions is adjacent to every other vertex.
            if (g.degree(u) == n - 1 && n > 1)
            {
                for (int v = 0; v < n; ++v)
                {
                    uf.unite(u, v);
                }
                single_component = true;
            }
        }
        if (!single_component)
        {
            for (int u = 0; u < n; ++u)
            {
                for (int v = u + 1; v < n; ++v)
                {
                    if (uf.find(u) != uf.find(v) && g.has_edge(u, v))
                    {
                        uf.unite(u, v);
                    }
                }
            }
        }
        Clustering c;
        c.assignment.assign(static_cast<std::size_t>(n), -1);
        for (int u = 0; u < n; ++u)
        {
            const int root = uf.find(u);
            if (c.assignment[static_cast<std::size_t>(root)] < 0)
            {
                c.assignment[static_cast<std::size_t>(root)] = static_cast<int>(c.clusters.size());
                c.clusters.emplace_back();
            }
            const int id = c.assignment[static_cast<std::size_t>(root)];
            if (u != root)
            {
                c.assignment[static_cast<std::size_t>(u)] = id;
            }
            c.clusters[static_cast<std::size_t>(id)].push_back(u);
        }
        return c;
    }
}
