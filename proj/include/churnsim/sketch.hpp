#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "churnsim/hash.hpp"
#include "churnsim/rng.hpp"
#include "churnsim/types.hpp"

namespace churnsim {

/// k running minima of rate-1 exponential draws. Each contributing node adds
/// one draw per copy; the entrywise minimum over m contributors is Exp(m).
template <typename Scalar>
class BasicSizeSketch {
public:
    using Minima = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    BasicSizeSketch() = default;
    explicit BasicSizeSketch(Minima minima) : minima_(std::move(minima)) {}

    /// Sketch with no contributors: every entry is +inf.
    static BasicSizeSketch empty(Eigen::Index k) {
        return BasicSizeSketch(Minima::Constant(k, std::numeric_limits<Scalar>::infinity()));
    }

    Eigen::Index k() const { return minima_.size(); }
    const Minima& minima() const { return minima_; }
    Scalar operator[](Eigen::Index i) const { return minima_[i]; }

    /// Entrywise min in place; returns true if any entry decreased.
    bool merge_from(const BasicSizeSketch& other) {
        if (other.k() != k()) {
            throw Error(ErrorCode::KMismatch, "merging sketches with k=" + std::to_string(k()) +
                                                  " and k=" + std::to_string(other.k()));
        }
        bool changed = false;
        for (Eigen::Index i = 0; i < k(); ++i) {
            if (other.minima_[i] < minima_[i]) {
                minima_[i] = other.minima_[i];
                changed = true;
            }
        }
        return changed;
    }

    /// Sum of entries, accumulated in index order so the result is
    /// reproducible bit-for-bit independent of vectorization.
    Scalar sum() const {
        Scalar s = 0;
        for (Eigen::Index i = 0; i < k(); ++i) {
            s += minima_[i];
        }
        return s;
    }

    std::uint64_t digest() const {
        Hasher h;
        for (Eigen::Index i = 0; i < k(); ++i) {
            h.add(static_cast<double>(minima_[i]));
        }
        return h.digest();
    }

    bool operator==(const BasicSizeSketch& other) const {
        return k() == other.k() && (minima_ == other.minima_).all();
    }

private:
    Minima minima_;
};

using SizeSketch = BasicSizeSketch<double>;

struct SizeEstimate {
    double n_hat = 0;
    Eigen::Index k = 0;
    std::uint32_t rounds = 0;
};

/// One rate-1 exponential draw by inverse CDF, -ln(u) with u in (0, 1].
/// u == 1 would give 0, which the sketch excludes, so it is redrawn.
inline double draw_exponential(Stream& rng) {
    for (;;) {
        const double u = rng.uniform_open_closed();
        if (u < 1.0) {
            return -std::log(u);
        }
    }
}

/// k independent Exp(1) draws from the node's stream. Throws Error(BadK) for k < 2.
template <typename Scalar = double>
BasicSizeSketch<Scalar> draw_sketch(Stream& rng, Eigen::Index k) {
    if (k < 2) {
        throw Error(ErrorCode::BadK, "sketch needs k >= 2, got " + std::to_string(k));
    }
    typename BasicSizeSketch<Scalar>::Minima minima(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        minima[i] = static_cast<Scalar>(draw_exponential(rng));
    }
    return BasicSizeSketch<Scalar>(std::move(minima));
}

template <typename Scalar>
BasicSizeSketch<Scalar> merge(const BasicSizeSketch<Scalar>& a, const BasicSizeSketch<Scalar>& b) {
    BasicSizeSketch<Scalar> out = a;
    out.merge_from(b);
    return out;
}

/// n_hat = (k - 1) / sum(minima): the sum of k Exp(m) variables is Gamma(k, m)
/// and E[(k - 1) / Gamma(k, m)] = m. A sketch with no contributors (infinite
/// sum) estimates 0. Throws BadK for k < 2 and DegenerateSum for a zero sum.
template <typename Scalar>
SizeEstimate estimate(const BasicSizeSketch<Scalar>& s, std::uint32_t rounds = 0) {
    if (s.k() < 2) {
        throw Error(ErrorCode::BadK, "estimator undefined for k < 2");
    }
    const Scalar total = s.sum();
    if (total == Scalar(0)) {
        throw Error(ErrorCode::DegenerateSum, "sum of minima is zero");
    }
    SizeEstimate e;
    e.k = s.k();
    e.rounds = rounds;
    e.n_hat = std::isinf(static_cast<double>(total))
                  ? 0.0
                  : static_cast<double>((static_cast<Scalar>(s.k()) - Scalar(1)) / total);
    return e;
}

/// Copy count for a target relative error: ceil(8 ln(n) / eps^2), at least 2.
Eigen::Index default_sketch_k(std::uint64_t n, double relative_error = 0.1);

/// Dump format: `k` on the first line, then one minimum per line printed with
/// 17 significant digits (round-trip exact).
void write_sketch(std::ostream& out, const SizeSketch& s);
SizeSketch read_sketch(std::istream& in);

}  // namespace churnsim
