#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cmath>
#include <vector>

#include "churnsim/graph.hpp"
#include "churnsim/rng.hpp"

namespace churnsim {

template <typename Scalar>
struct BasicSpectralReport {
    Scalar lambda2_abs = 0;  // second-largest |eigenvalue| of D^-1/2 A D^-1/2
    Scalar gap = 0;          // 1 - lambda2_abs
    int iterations = 0;
    Scalar tolerance_achieved = 0;  // last change in the estimate
    bool converged = false;         // false: NoConvergence, estimate is the best seen
};

using SpectralReport = BasicSpectralReport<double>;

/// Symmetric normalized adjacency D^-1/2 A D^-1/2. Isolated vertices get a zero row.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> normalized_adjacency(const Graph& g) {
    const Eigen::Index n = g.size();
    std::vector<Eigen::Triplet<Scalar>> entries;
    entries.reserve(2 * g.edge_count());
    for (Index u = 0; u < g.size(); ++u) {
        for (const Index v : g.neighbors(u)) {
            const Scalar w = Scalar(1) / std::sqrt(static_cast<Scalar>(g.degree(u)) *
                                                   static_cast<Scalar>(g.degree(v)));
            entries.emplace_back(u, v, w);
        }
    }
    Eigen::SparseMatrix<Scalar> m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
}

/// Unit vector along sqrt(degree): the top eigenvector (eigenvalue 1) of the
/// normalized adjacency of a connected graph.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> stationary_direction(const Graph& g) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s(g.size());
    for (Index v = 0; v < g.size(); ++v) {
        s[v] = std::sqrt(static_cast<Scalar>(g.degree(v)));
    }
    return s.normalized();
}

/// Second-largest absolute eigenvalue by power iteration with deflation of the
/// stationary direction. The estimate is the growth ratio ||Mx|| / ||x||,
/// which converges to max |lambda| over the deflated subspace even when
/// +lambda and -lambda are both present (bipartite graphs).
///
/// Throws Error(NotConnected) for an empty or disconnected graph.
template <typename Scalar = double>
BasicSpectralReport<Scalar> spectral_gap(const Graph& g, Scalar tolerance = Scalar(1e-9),
                                         int max_iterations = 20000,
                                         std::uint64_t seed = 0x5eed) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (g.size() == 0 || !is_connected(g)) {
        throw Error(ErrorCode::NotConnected, "spectral gap requires a connected, non-empty graph");
    }
    BasicSpectralReport<Scalar> report;
    if (g.size() == 1) {
        report.converged = true;
        report.gap = 1;
        return report;
    }

    const auto m = normalized_adjacency<Scalar>(g);
    const Vector top = stationary_direction<Scalar>(g);

    Stream rng = Stream::derive(seed, Domain::Spectral, g.size(), g.edge_count());
    Vector x(g.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = static_cast<Scalar>(rng.uniform() - 0.5);
    }
    x -= top.dot(x) * top;
    x.normalize();

    Scalar estimate = 0;
    Vector y(g.size());
    for (int it = 1; it <= max_iterations; ++it) {
        y.noalias() = m * x;
        y -= top.dot(y) * top;
        const Scalar norm = y.norm();
        report.iterations = it;
        if (norm == Scalar(0)) {
            // x sits in the kernel: every remaining eigenvalue seen is zero.
            estimate = 0;
            report.tolerance_achieved = 0;
            report.converged = true;
            break;
        }
        const Scalar change = std::abs(norm - estimate);
        estimate = norm;
        x = y / norm;
        report.tolerance_achieved = change;
        if (it > 1 && change <= tolerance) {
            report.converged = true;
            break;
        }
    }
    report.lambda2_abs = std::min<Scalar>(Scalar(1), std::max<Scalar>(Scalar(0), estimate));
    report.gap = Scalar(1) - report.lambda2_abs;
    return report;
}

}  // namespace churnsim
