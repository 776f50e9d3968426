#pragma once

#include "errors.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace distclub
{
    using RealVector = std::vector<double>;

    inline double dot(const RealVector &a, const RealVector &b)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            s += a[i] * b[i];
        }
        return s;
    }

    inline double norm2(const RealVector &a)
    {
        return std::sqrt(dot(a, a));
    }

    inline double distance2(const RealVector &a, const RealVector &b)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            const double di = a[i] - b[i];
            s += di * di;
        }
        return std::sqrt(s);
    }

    // y += a * x
    inline void add_scaled(RealVector &y, double a, const RealVector &x)
    {
        for (std::size_t i = 0; i < y.size(); ++i)
        {
            y[i] += a * x[i];
        }
    }

    inline RealVector normalized(RealVector v)
    {
        const double n = norm2(v);
        if (n > 0.0)
        {
            for (double &e : v)
            {
                e /= n;
            }
        }
        return v;
    }

    // Small dense symmetric matrix, row-major. Holds the regularized Gram
    // matrices (M, Mc) and their maintained inverses. Mutating operations are
    // written to keep the two triangles bit-identical: the upper triangle is
    // computed and mirrored.
    class SpdMatrix
    {
    public:
        SpdMatrix() = default;

        explicit SpdMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0)
        {
            if (dim < 1)
            {
                throw InputError("SpdMatrix: dim must be >= 1");
            }
        }

        static SpdMatrix identity(int dim)
        {
            SpdMatrix m(dim);
            for (int i = 0; i < dim; ++i)
            {
                m(i, i) = 1.0;
            }
            return m;
        }

        int dim() const { return dim_; }

        double &operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)]; }
        double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)]; }

        std::span<const double> data() const { return a_; }

        // Elementwise sum; symmetry is preserved exactly because both inputs are.
        SpdMatrix &operator+=(const SpdMatrix &o)
        {
            if (o.dim_ != dim_)
            {
                throw InputError("SpdMatrix::operator+=: dim mismatch");
            }
            for (std::size_t i = 0; i < a_.size(); ++i)
            {
                a_[i] += o.a_[i];
            }
            return *this;
        }

        RealVector multiply(const RealVector &x) const
        {
            if (static_cast<int>(x.size()) != dim_)
            {
                throw InputError("SpdMatrix::multiply: dim mismatch");
            }
            RealVector y(static_cast<std::size_t>(dim_), 0.0);
            for (int i = 0; i < dim_; ++i)
            {
                double s = 0.0;
                for (int j = 0; j < dim_; ++j)
                {
                    s += (*this)(i, j) * x[j];
                }
                y[static_cast<std::size_t>(i)] = s;
            }
            return y;
        }

        bool operator==(const SpdMatrix &o) const = default;

    private:
        int dim_ = 0;
        std::vector<double> a_;
    };

    // m + x * x^T. Upper triangle computed, lower mirrored, so the result is
    // exactly symmetric irrespective of rounding.
    inline SpdMatrix rank1_update(const SpdMatrix &m, const RealVector &x, double coef = 1.0)
    {
        if (static_cast<int>(x.size()) != m.dim())
        {
            throw InputError("rank1_update: dim mismatch");
        }
        SpdMatrix r = m;
        const int d = m.dim();
        for (int i = 0; i < d; ++i)
        {
            for (int j = i; j < d; ++j)
            {
                const double v = r(i, j) + coef * (x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)]);
                r(i, j) = v;
                r(j, i) = v;
            }
        }
        return r;
    }

    namespace detail
    {
        // Lower-triangular Cholesky factor of an SPD matrix. Throws NumericError
        // on a non-positive pivot.
        inline SpdMatrix cholesky_factor(const SpdMatrix &m)
        {
            const int d = m.dim();
            SpdMatrix l(d);
            for (int i = 0; i < d; ++i)
            {
                for (int j = 0; j <= i; ++j)
                {
                    double s = m(i, j);
                    for (int k = 0; k < j; ++k)
                    {
                        s -= l(i, k) * l(j, k);
                    }
                    if (i == j)
                    {
                        if (!(s > 0.0))
                        {
                            throw NumericError("cholesky: matrix is not positive definite");
                        }
                        l(i, i) = std::sqrt(s);
                    }
                    else
                    {
                        l(i, j) = s / l(j, j);
                    }
                }
            }
            return l;
        }

        inline RealVector cholesky_solve(const SpdMatrix &l, const RealVector &rhs)
        {
            const int d = l.dim();
            RealVector y(static_cast<std::size_t>(d), 0.0);
            for (int i = 0; i < d; ++i)
            {
                double s = rhs[static_cast<std::size_t>(i)];
                for (int k = 0; k < i; ++k)
                {
                    s -= l(i, k) * y[static_cast<std::size_t>(k)];
                }
                y[static_cast<std::size_t>(i)] = s / l(i, i);
            }
            RealVector x(static_cast<std::size_t>(d), 0.0);
            for (int i = d - 1; i >= 0; --i)
            {
                double s = y[static_cast<std::size_t>(i)];
                for (int k = i + 1; k < d; ++k)
                {
                    s -= l(k, i) * x[static_cast<std::size_t>(k)];
                }
                x[static_cast<std::size_t>(i)] = s / l(i, i);
            }
            return x;
        }
    }

    // Solves M x = rhs by Cholesky factorization, without forming M^-1.
    inline RealVector spd_solve(const SpdMatrix &m, const RealVector &rhs)
    {
        if (static_cast<int>(rhs.size()) != m.dim())
        {
            throw InputError("spd_solve: dim mismatch");
        }
        return detail::cholesky_solve(detail::cholesky_factor(m), rhs);
    }

    // Full inverse via Cholesky, one solve per basis vector. The upper triangle
    // of the result is mirrored so the inverse is exactly symmetric.
    inline SpdMatrix cholesky_inverse(const SpdMatrix &m)
    {
        const int d = m.dim();
        const SpdMatrix l = detail::cholesky_factor(m);
        SpdMatrix inv(d);
        RealVector e(static_cast<std::size_t>(d), 0.0);
        for (int j = 0; j < d; ++j)
        {
            e[static_cast<std::size_t>(j)] = 1.0;
            const RealVector col = detail::cholesky_solve(l, e);
            e[static_cast<std::size_t>(j)] = 0.0;
            for (int i = 0; i < d; ++i)
            {
                inv(i, j) = col[static_cast<std::size_t>(i)];
            }
        }
        for (int i = 0; i < d; ++i)
        {
            for (int j = i + 1; j < d; ++j)
            {
                inv(j, i) = inv(i, j);
            }
        }
        return inv;
    }

    // Sherman-Morrison step: given minv = M^-1, returns (M + coef * x x^T)^-1.
    // For SPD minv and coef > 0 the denominator is >= 1; anything else signals
    // corrupted state.
    inline SpdMatrix inv_rank1_update(const SpdMatrix &minv, const RealVector &x, double coef = 1.0)
    {
        if (static_cast<int>(x.size()) != minv.dim())
        {
            throw InputError("inv_rank1_update: dim mismatch");
        }
        RealVector scaled = x;
        const double root = std::sqrt(coef);
        for (double &e : scaled)
        {
            e *= root;
        }
        const RealVector v = minv.multiply(scaled);
        const double denom = 1.0 + dot(scaled, v);
        if (!(denom > 0.0))
        {
            throw NumericError("inv_rank1_update: non-positive denominator");
        }
        SpdMatrix r = minv;
        const int d = minv.dim();
        for (int i = 0; i < d; ++i)
        {
            for (int j = i; j < d; ++j)
            {
                const double val = r(i, j) - (v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]) / denom;
                r(i, j) = val;
                r(j, i) = val;
            }
        }
        return r;
    }

    // Unit-norm vector uniform on the sphere.
    template <typename Rng>
    RealVector random_unit_vector(int dim, Rng &rng)
    {
        RealVector v(static_cast<std::size_t>(dim), 0.0);
        double n = 0.0;
        do
        {
            for (double &e : v)
            {
                e = rng.gaussian();
            }
            n = norm2(v);
        } while (n == 0.0);
        for (double &e : v)
        {
            e /= n;
        }
        return v;
    }
}
