// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Shared numeric aliases, error types and small statistics helpers.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repsim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr std::string_view kVersion = "0.1.0";

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed interchange file (header, shape, non-finite value).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Input violates a documented precondition or schema.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Linear system or whitening step hit a (near-)singular matrix.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// A score or statistic is undefined for the given input.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Non-fatal findings collected while computing a result.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
    bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string msg) {
    if (diag != nullptr) {
        diag->warn(std::move(msg));
    }
}

namespace detail {

/// Arithmetic mean; exact for constant input, so constant sets have zero variance.
inline double mean(std::span<const double> xs) {
    if (!xs.empty() && std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
        return xs.front();
    }
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

/// Population variance.
inline double variance(std::span<const double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(xs.size());
}

/// Pearson correlation; returns NaN when either side has zero variance.
inline double pearson_or_nan(std::span<const double> a, std::span<const double> b) {
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = a[k] - ma;
        const double db = b[k] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

/// Pearson correlation between two columns; a zero-variance column scores 0.
template <typename A, typename B>
double column_pearson(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y, bool* degenerate) {
    const double mx = x.mean();
    const double my = y.mean();
    const auto dx = (x.array() - mx).matrix();
    const auto dy = (y.array() - my).matrix();
    const double sxx = dx.squaredNorm();
    const double syy = dy.squaredNorm();
    // Relative threshold: columns that are zero up to rounding count as constant.
    const double scale = std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
    const double floor = std::pow(scale * 1e-13, 2) * static_cast<double>(x.size());
    if (sxx <= floor || syy <= floor) {
        if (degenerate != nullptr) {
            *degenerate = true;
        }
        return 0.0;
    }
    return std::clamp(dx.dot(dy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Mean over columns of the Pearson correlation between matching columns of
/// `target` and `pred`. Only the first `count` columns are scored.
inline double mean_unitwise_correlation(const Matrix& target, const Matrix& pred, Index count,
                                        Diagnostics* diag, std::string_view what) {
    double total = 0.0;
    Index zero_var = 0;
    for (Index c = 0; c < count; ++c) {
        bool degenerate = false;
        total += column_pearson(target.col(c), pred.col(c), &degenerate);
        if (degenerate) {
            ++zero_var;
        }
    }
    if (zero_var > 0) {
        warn(diag, std::string(what) + ": " + std::to_string(zero_var) +
                       " zero-variance unit(s) scored as correlation 0");
    }
    return total / static_cast<double>(count);
}

/// 64-bit mixer used to derive independent seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Seed for the (metric, i, j) job derived from a run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view metric, std::uint64_t i, std::uint64_t j) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ detail::fnv1a(metric));
    h = detail::splitmix64(h ^ i);
    return detail::splitmix64(h ^ (j + 0x51ed270b27a9e3c1ULL));
}

}  // namespace repsim
