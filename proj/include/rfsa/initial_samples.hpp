#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfsa/errors.hpp"
#include "rfsa/rfs_core.hpp"
#include "rfsa/time_series.hpp"

namespace rfsa {

/// Condition estimate (of the Jacobi-scaled system) above which the solve falls back to least norm.
inline constexpr double fallback_condition = 1e12;
/// Condition estimate above which the system is reported singular.
inline constexpr double singular_condition = 1e14;

struct LinearSolveDiagnostics {
    double condition = 1.0;
    bool least_norm_fallback = false;
};

/// Solves the symmetric positive semi-definite system G·z = g.
///
/// The system is Jacobi-scaled to a unit diagonal and the condition estimate is
/// taken on the scaled matrix. Well conditioned systems use LDLᵀ; between `fallback_condition` and
/// `singular_condition` the minimum-norm solution over the numerically
/// significant eigenspace is returned; beyond that SingularSystemError is thrown.
inline Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& G, const Eigen::VectorXd& g,
                                              LinearSolveDiagnostics* diagnostics = nullptr) {
    const Eigen::Index n = G.rows();
    if (G.cols() != n || g.size() != n) {
        throw InvalidArgument("normal equations: dimension mismatch");
    }
    if (n == 0) {
        return Eigen::VectorXd();
    }
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = G(i, i);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw SingularSystemError("normal equations: zero or non-finite diagonal entry",
                                      std::numeric_limits<double>::infinity());
        }
        scale(i) = 1.0 / std::sqrt(d);
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * G * scale.asDiagonal();
    const Eigen::VectorXd rhs = scale.asDiagonal() * g;
    if (!scaled.allFinite() || !rhs.allFinite()) {
        throw SingularSystemError("normal equations: non-finite entries", std::numeric_limits<double>::infinity());
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
    if (eig.info() != Eigen::Success) {
        throw SingularSystemError("normal equations: eigen-decomposition failed",
                                  std::numeric_limits<double>::infinity());
    }
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    const double condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();

    LinearSolveDiagnostics diag{condition, false};
    Eigen::VectorXd z;
    if (condition <= fallback_condition) {
        z = scaled.ldlt().solve(rhs);
    } else if (condition <= singular_condition) {
        diag.least_norm_fallback = true;
        const double cutoff = lmax / fallback_condition;
        const auto& values = eig.eigenvalues();
        const auto& vectors = eig.eigenvectors();
        const Eigen::VectorXd projected = vectors.transpose() * rhs;
        Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (values(i) > cutoff) {
                coeffs(i) = projected(i) / values(i);
            }
        }
        z = vectors * coeffs;
    } else {
        throw SingularSystemError("normal equations are numerically singular", condition);
    }
    if (diagnostics) {
        *diagnostics = diag;
    }
    return scale.asDiagonal() * z;
}

/// K×2M matrix whose row k is (b_{1,k}, a_{1,k}, …, b_{M,k}, a_{M,k}).
struct DesignMatrix {
    Eigen::MatrixXd entries;
};

/// Writes the (b, a) column pair of one frequency into columns [col, col + 1].
inline void fill_design_columns(Eigen::MatrixXd& J, Eigen::Index col, double freq_param, const TimeGrid& grid,
                                SamplingMode mode, double guard = default_guard) {
    const std::size_t K = grid.size();
    if (mode == SamplingMode::uniform) {
        if (!grid.is_uniform()) {
            throw InvalidArgument("uniform design matrix requested on a non-uniform grid");
        }
        const auto seq = coeffs_uniform_sequence(freq_param, K);
        for (std::size_t k = 0; k < K; ++k) {
            J(static_cast<Eigen::Index>(k), col) = seq.b[k];
            J(static_cast<Eigen::Index>(k), col + 1) = seq.a[k];
        }
    } else {
        const double t1 = grid.front();
        const double t2 = grid.second();
        for (std::size_t k = 0; k < K; ++k) {
            const auto [a, b] = coeffs_nonuniform(freq_param, grid[k], t1, t2, guard);
            J(static_cast<Eigen::Index>(k), col) = b;
            J(static_cast<Eigen::Index>(k), col + 1) = a;
        }
        J(0, col) = 1.0;
        J(0, col + 1) = 0.0;
        J(1, col) = 0.0;
        J(1, col + 1) = 1.0;
    }
}

inline DesignMatrix build_design_matrix(std::span<const double> freq_params, const TimeGrid& grid, SamplingMode mode,
                                        double guard = default_guard) {
    const auto M = static_cast<Eigen::Index>(freq_params.size());
    DesignMatrix design{Eigen::MatrixXd(static_cast<Eigen::Index>(grid.size()), 2 * M)};
    for (Eigen::Index m = 0; m < M; ++m) {
        fill_design_columns(design.entries, 2 * m, freq_params[static_cast<std::size_t>(m)], grid, mode, guard);
    }
    return design;
}

/// Initial samples ordered (y_{1,1}, y_{1,2}, …, y_{M,1}, y_{M,2}).
struct InitialSamples {
    Eigen::VectorXd alpha;
};

struct InitialSampleSolution {
    InitialSamples samples;
    double sse = 0.0;
    LinearSolveDiagnostics diagnostics;
};

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> values) {
    return {values.data(), static_cast<Eigen::Index>(values.size())};
}

/// Least-squares initial samples for a design matrix already built for `series`.
inline InitialSampleSolution solve_with_design(const TimeSeries& series, const Eigen::MatrixXd& J) {
    const auto w = as_vector(series.values());
    const Eigen::MatrixXd G = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * w;
    InitialSampleSolution out;
    out.samples.alpha = solve_normal_equations(G, g, &out.diagnostics);
    out.sse = (w - J * out.samples.alpha).squaredNorm();
    return out;
}

/// Solves (JᵀJ)α = Jᵀw for fixed trial frequencies and returns the prediction SSE at α.
inline InitialSampleSolution solve_initial_samples(const TimeSeries& series, std::span<const double> freq_params,
                                                   SamplingMode mode, double guard = default_guard) {
    if (series.size() < 2 * freq_params.size()) {
        throw InvalidArgument("need at least 2M samples to solve for " + std::to_string(freq_params.size()) +
                              " components");
    }
    const auto design = build_design_matrix(freq_params, series.grid(), mode, guard);
    return solve_with_design(series, design.entries);
}

} // namespace rfsa
