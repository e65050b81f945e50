// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Agglomerative clustering of a distance matrix, optimal leaf ordering,
// flat cuts, cophenetic correlation and Newick export.
//
// Node numbering follows the usual linkage convention: leaves are 0..n-1 and
// the cluster created by merge t is n + t.

#pragma once

#include "repsim/common.hpp"
#include "repsim/datamodel.hpp"

#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace repsim {

enum class Linkage { Average, Single, Complete };

inline std::string_view to_string(Linkage l) {
    switch (l) {
        case Linkage::Single:
            return "single";
        case Linkage::Complete:
            return "complete";
        default:
            return "average";
    }
}

struct Merge {
    Index left;   // smaller node id
    Index right;  // larger node id
    double height;
    Index size;
};

struct LinkageTree {
    std::vector<Merge> merges;     // n - 1 steps
    std::vector<Index> leaf_order;  // permutation of 0..n-1
    Linkage linkage = Linkage::Average;

    Index leaf_count() const { return static_cast<Index>(merges.size()) + 1; }
};

/// d = 1 - (S + S^T)/2 with zero diagonal; negative distances are clamped.
inline Matrix to_distance(const Matrix& s, Diagnostics* diag = nullptr) {
    Matrix d = Matrix::Ones(s.rows(), s.cols()) - 0.5 * (s + s.transpose());
    d.diagonal().setZero();
    Index clamped = 0;
    for (Index i = 0; i < d.rows(); ++i) {
        for (Index j = 0; j < d.cols(); ++j) {
            if (d(i, j) < 0.0) {
                d(i, j) = 0.0;
                ++clamped;
            }
        }
    }
    if (clamped > 0) {
        warn(diag, "to_distance: clamped " + std::to_string(clamped) + " negative distances to 0");
    }
    return d;
}

namespace clustering_detail {

inline void check_distance(const Matrix& d) {
    const Index n = d.rows();
    if (d.cols() != n) {
        throw ValidationError("clustering: distance matrix must be square");
    }
    if (n < 2) {
        throw ValidationError("clustering: need at least 2 items");
    }
    for (Index i = 0; i < n; ++i) {
        if (d(i, i) != 0.0) {
            throw ValidationError("clustering: distance diagonal must be zero");
        }
        for (Index j = 0; j < n; ++j) {
            if (!std::isfinite(d(i, j)) || d(i, j) < 0.0 || d(i, j) != d(j, i)) {
                throw ValidationError("clustering: distances must be finite, nonnegative and symmetric");
            }
        }
    }
}

struct Children {
    std::vector<Index> left;
    std::vector<Index> right;
};

inline Children children(const LinkageTree& tree) {
    const Index n = tree.leaf_count();
    Children c{std::vector<Index>(static_cast<std::size_t>(2 * n - 1), -1),
               std::vector<Index>(static_cast<std::size_t>(2 * n - 1), -1)};
    for (std::size_t t = 0; t < tree.merges.size(); ++t) {
        c.left[static_cast<std::size_t>(n) + t] = tree.merges[t].left;
        c.right[static_cast<std::size_t>(n) + t] = tree.merges[t].right;
    }
    return c;
}

// Leaves of each node in left-to-right construction order; every subtree is
// a contiguous range [lo, hi) of `order`.
struct LeafRanges {
    std::vector<Index> order;
    std::vector<Index> lo;
    std::vector<Index> hi;
};

inline LeafRanges leaf_ranges(const LinkageTree& tree) {
    const Index n = tree.leaf_count();
    const auto ch = children(tree);
    LeafRanges r;
    r.lo.assign(static_cast<std::size_t>(2 * n - 1), 0);
    r.hi.assign(static_cast<std::size_t>(2 * n - 1), 0);
    // Iterative DFS from the root, left child first.
    std::vector<std::pair<Index, bool>> stack{{2 * n - 2, false}};
    while (!stack.empty()) {
        auto [v, expanded] = stack.back();
        stack.pop_back();
        const auto sv = static_cast<std::size_t>(v);
        if (v < n) {
            r.lo[sv] = static_cast<Index>(r.order.size());
            r.order.push_back(v);
            r.hi[sv] = r.lo[sv] + 1;
            continue;
        }
        if (expanded) {
            r.lo[sv] = r.lo[static_cast<std::size_t>(ch.left[sv])];
            r.hi[sv] = r.hi[static_cast<std::size_t>(ch.right[sv])];
            continue;
        }
        stack.push_back({v, true});
        stack.push_back({ch.right[sv], false});
        stack.push_back({ch.left[sv], false});
    }
    return r;
}

}  // namespace clustering_detail

/// Sum of distances between consecutive leaves.
inline double leaf_order_cost(const std::vector<Index>& order, const Matrix& d) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        s += d(order[k], order[k + 1]);
    }
    return s;
}

/// Minimizes the sum of adjacent-leaf distances over the 2^(n-1) orderings
/// compatible with the tree (Bar-Joseph et al. dynamic program, O(n^3)).
/// Among equal-cost candidates the lexicographically first endpoint pair wins
/// at every level.
inline std::vector<Index> optimal_leaf_order(const LinkageTree& tree, const Matrix& d) {
    using clustering_detail::LeafRanges;
    const Index n = tree.leaf_count();
    if (d.rows() != n) {
        throw ValidationError("optimal_leaf_order: distance matrix does not match tree");
    }
    if (n <= 2) {
        std::vector<Index> o(static_cast<std::size_t>(n));
        std::iota(o.begin(), o.end(), Index{0});
        return o;
    }
    const auto ch = clustering_detail::children(tree);
    const LeafRanges rg = clustering_detail::leaf_ranges(tree);
    const auto& pos_order = rg.order;
    auto leaves = [&](Index v) {
        const auto sv = static_cast<std::size_t>(v);
        return std::span<const Index>(pos_order.data() + rg.lo[sv], static_cast<std::size_t>(rg.hi[sv] - rg.lo[sv]));
    };
    std::vector<Index> where(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < pos_order.size(); ++k) {
        where[static_cast<std::size_t>(pos_order[k])] = static_cast<Index>(k);
    }
    auto contains = [&](Index v, Index leaf) {
        const auto w = where[static_cast<std::size_t>(leaf)];
        return w >= rg.lo[static_cast<std::size_t>(v)] && w < rg.hi[static_cast<std::size_t>(v)];
    };
    // Leaves of `v` that may end an ordering of v starting at leaf u.
    auto far_side = [&](Index v, Index u) {
        if (v < n) {
            return leaves(v);
        }
        const auto sv = static_cast<std::size_t>(v);
        return contains(ch.left[sv], u) ? leaves(ch.right[sv]) : leaves(ch.left[sv]);
    };

    // cost(u, w): best cost of an ordering of lca(u, w) starting at u, ending at w.
    Matrix cost = Matrix::Zero(n, n);
    for (std::size_t t = 0; t < tree.merges.size(); ++t) {
        const Index l = tree.merges[t].left;
        const Index r = tree.merges[t].right;
        const auto ll = leaves(l);
        const auto rl = leaves(r);
        // best_to[u][k] = min_m cost(u, m) + d(m, k), m on the far side of u in l.
        Matrix best_to(static_cast<Index>(ll.size()), static_cast<Index>(rl.size()));
        for (std::size_t a = 0; a < ll.size(); ++a) {
            const Index u = ll[a];
            const auto ms = far_side(l, u);
            for (std::size_t b = 0; b < rl.size(); ++b) {
                const Index k = rl[b];
                double best = std::numeric_limits<double>::infinity();
                for (Index m : ms) {
                    best = std::min(best, cost(u, m) + d(m, k));
                }
                best_to(static_cast<Index>(a), static_cast<Index>(b)) = best;
            }
        }
        for (std::size_t b = 0; b < rl.size(); ++b) {
            const Index w = rl[b];
            const auto ks = far_side(r, w);
            for (std::size_t a = 0; a < ll.size(); ++a) {
                const Index u = ll[a];
                double best = std::numeric_limits<double>::infinity();
                for (Index k : ks) {
                    const Index kb = where[static_cast<std::size_t>(k)] - rg.lo[static_cast<std::size_t>(r)];
                    best = std::min(best, best_to(static_cast<Index>(a), kb) + cost(k, w));
                }
                cost(u, w) = best;
                cost(w, u) = best;
            }
        }
    }

    // Reconstruct top-down.
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n));
    struct Frame {
        Index node;
        Index start;
        Index end;
    };
    const Index root = 2 * n - 2;
    Index bu = -1;
    Index bw = -1;
    {
        double best = std::numeric_limits<double>::infinity();
        for (Index u = 0; u < n; ++u) {
            for (Index w = u + 1; w < n; ++w) {
                const Index lroot = ch.left[static_cast<std::size_t>(root)];
                const bool split = contains(lroot, u) != contains(lroot, w);
                if (split && cost(u, w) < best) {
                    best = cost(u, w);
                    bu = u;
                    bw = w;
                }
            }
        }
    }
    std::vector<Frame> stack{{root, bu, bw}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.node < n) {
            order.push_back(f.node);
            continue;
        }
        const auto sv = static_cast<std::size_t>(f.node);
        Index first = ch.left[sv];
        Index second = ch.right[sv];
        if (!contains(first, f.start)) {
            std::swap(first, second);
        }
        const auto ms = far_side(first, f.start);
        const auto ks = far_side(second, f.end);
        double best = std::numeric_limits<double>::infinity();
        Index bm = -1;
        Index bk = -1;
        for (Index m : ms) {
            for (Index k : ks) {
                const double c = cost(f.start, m) + d(m, k) + cost(k, f.end);
                if (c < best || (c == best && (m < bm || (m == bm && k < bk)))) {
                    best = c;
                    bm = m;
                    bk = k;
                }
            }
        }
        // Pushed in reverse so `first` is emitted before `second`.
        stack.push_back({second, bk, f.end});
        stack.push_back({first, f.start, bm});
    }
    return order;
}

/// Agglomerative clustering, average linkage (UPGMA) by default. At each step
/// the closest pair of active clusters merges; ties go to the
/// lexicographically smallest pair of cluster ids. The optimal leaf order is
/// attached to the result.
inline LinkageTree hierarchical_cluster(const Matrix& d, Linkage method = Linkage::Average) {
    clustering_detail::check_distance(d);
    const Index n = d.rows();
    const Index total = 2 * n - 1;
    Matrix dist = Matrix::Constant(total, total, std::numeric_limits<double>::infinity());
    dist.topLeftCorner(n, n) = d;
    std::vector<Index> size(static_cast<std::size_t>(total), 1);
    std::vector<Index> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), Index{0});

    LinkageTree tree;
    tree.linkage = method;
    for (Index step = 0; step < n - 1; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0;
        std::size_t bb = 0;
        // `active` is sorted ascending, so the first strict minimum found is
        // the lexicographically smallest (a, b).
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double v = dist(active[a], active[b]);
                if (v < best) {
                    best = v;
                    ba = a;
                    bb = b;
                }
            }
        }
        const Index x = active[ba];
        const Index y = active[bb];
        const Index z = n + step;
        const auto sx = static_cast<double>(size[static_cast<std::size_t>(x)]);
        const auto sy = static_cast<double>(size[static_cast<std::size_t>(y)]);
        size[static_cast<std::size_t>(z)] = size[static_cast<std::size_t>(x)] + size[static_cast<std::size_t>(y)];
        tree.merges.push_back({x, y, best, size[static_cast<std::size_t>(z)]});
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(ba));
        for (Index c : active) {
            double v = 0.0;
            switch (method) {
                case Linkage::Average:
                    v = (sx * dist(x, c) + sy * dist(y, c)) / (sx + sy);
                    break;
                case Linkage::Single:
                    v = std::min(dist(x, c), dist(y, c));
                    break;
                case Linkage::Complete:
                    v = std::max(dist(x, c), dist(y, c));
                    break;
            }
            dist(z, c) = v;
            dist(c, z) = v;
        }
        active.push_back(z);
    }
    tree.leaf_order = optimal_leaf_order(tree, d);
    return tree;
}

struct FlatClusters {
    std::vector<int> labels;  // 0-based, numbered by first appearance in leaf index order
    Index k = 0;              // number of clusters actually produced
    std::string warning;      // set when the requested k was not reachable
};

/// Cuts the dendrogram into k clusters by applying the first n - k merges.
/// If a tie in merge heights makes k unreachable by a height cut, the nearest
/// reachable k is used (fewer merges on a tie in distance).
inline FlatClusters flat_clusters(const LinkageTree& tree, Index k) {
    const Index n = tree.leaf_count();
    if (k < 1 || k > n) {
        throw ValidationError("flat_clusters: k must lie in [1, n]");
    }
    // k reachable iff the last applied merge is strictly lower than the next.
    auto reachable = [&](Index kk) {
        const Index applied = n - kk;
        if (applied == 0 || applied == n - 1) {
            return true;
        }
        return tree.merges[static_cast<std::size_t>(applied - 1)].height <
               tree.merges[static_cast<std::size_t>(applied)].height;
    };
    FlatClusters out;
    Index chosen = k;
    if (!reachable(k)) {
        for (Index delta = 1; delta < n; ++delta) {
            if (k + delta <= n && reachable(k + delta)) {
                chosen = k + delta;
                break;
            }
            if (k - delta >= 1 && reachable(k - delta)) {
                chosen = k - delta;
                break;
            }
        }
        out.warning = "tied merge heights: k=" + std::to_string(k) + " unreachable, using k=" + std::to_string(chosen);
    }
    std::vector<Index> parent(static_cast<std::size_t>(2 * n - 1));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    for (Index t = 0; t < n - chosen; ++t) {
        const auto& m = tree.merges[static_cast<std::size_t>(t)];
        parent[static_cast<std::size_t>(find(m.left))] = n + t;
        parent[static_cast<std::size_t>(find(m.right))] = n + t;
    }
    std::vector<int> root_label(static_cast<std::size_t>(2 * n - 1), -1);
    int next = 0;
    out.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(find(i));
        if (root_label[r] < 0) {
            root_label[r] = next++;
        }
        out.labels[static_cast<std::size_t>(i)] = root_label[r];
    }
    out.k = next;
    return out;
}

/// Cophenetic distances: height of the merge at which i and j first join.
inline Matrix cophenetic_distances(const LinkageTree& tree) {
    const Index n = tree.leaf_count();
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(2 * n - 1));
    for (Index i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(i)] = {i};
    }
    Matrix c = Matrix::Zero(n, n);
    for (std::size_t t = 0; t < tree.merges.size(); ++t) {
        const auto& m = tree.merges[t];
        const auto& a = members[static_cast<std::size_t>(m.left)];
        const auto& b = members[static_cast<std::size_t>(m.right)];
        for (Index i : a) {
            for (Index j : b) {
                c(i, j) = m.height;
                c(j, i) = m.height;
            }
        }
        auto& z = members[static_cast<std::size_t>(n) + t];
        z = a;
        z.insert(z.end(), b.begin(), b.end());
    }
    return c;
}

/// Pearson correlation between the strict upper triangles of the cophenetic
/// distances and `d`.
inline double cophenetic_correlation(const LinkageTree& tree, const Matrix& d) {
    const Index n = tree.leaf_count();
    if (d.rows() != n || d.cols() != n) {
        throw ValidationError("cophenetic_correlation: distance matrix does not match tree");
    }
    const Matrix c = cophenetic_distances(tree);
    std::vector<double> a;
    std::vector<double> b;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            a.push_back(c(i, j));
            b.push_back(d(i, j));
        }
    }
    const double r = detail::pearson_or_nan(a, b);
    if (std::isnan(r)) {
        throw DegenerateError("cophenetic_correlation: constant distances, correlation undefined");
    }
    return r;
}

/// Newick string; branch lengths are height differences, children appear in
/// leaf-order orientation.
inline std::string to_newick(const LinkageTree& tree, const std::vector<std::string>& names) {
    const Index n = tree.leaf_count();
    if (static_cast<Index>(names.size()) != n) {
        throw ValidationError("to_newick: name count does not match tree");
    }
    const auto ch = clustering_detail::children(tree);
    std::vector<Index> rank(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < tree.leaf_order.size(); ++k) {
        rank[static_cast<std::size_t>(tree.leaf_order[k])] = static_cast<Index>(k);
    }
    std::vector<Index> first_rank(static_cast<std::size_t>(2 * n - 1));
    std::vector<double> height(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (Index i = 0; i < n; ++i) {
        first_rank[static_cast<std::size_t>(i)] = rank[static_cast<std::size_t>(i)];
    }
    for (std::size_t t = 0; t < tree.merges.size(); ++t) {
        const auto& m = tree.merges[t];
        first_rank[static_cast<std::size_t>(n) + t] =
            std::min(first_rank[static_cast<std::size_t>(m.left)], first_rank[static_cast<std::size_t>(m.right)]);
        height[static_cast<std::size_t>(n) + t] = m.height;
    }
    auto quote = [](const std::string& s) {
        if (s.find_first_of(" ():;,[]'") == std::string::npos) {
            return s;
        }
        std::string q = "'";
        for (char c : s) {
            q += c;
            if (c == '\'') {
                q += '\'';
            }
        }
        return q + "'";
    };
    auto fmt = [](double v) { return io_detail::format_double(v); };
    // Merges are in bottom-up order, so children are always emitted first.
    std::vector<std::string> text(static_cast<std::size_t>(2 * n - 1));
    for (Index i = 0; i < n; ++i) {
        text[static_cast<std::size_t>(i)] = quote(names[static_cast<std::size_t>(i)]);
    }
    for (std::size_t t = 0; t < tree.merges.size(); ++t) {
        const auto v = static_cast<std::size_t>(n) + t;
        Index a = ch.left[v];
        Index b = ch.right[v];
        if (first_rank[static_cast<std::size_t>(b)] < first_rank[static_cast<std::size_t>(a)]) {
            std::swap(a, b);
        }
        const double h = height[v];
        text[v] = "(" + text[static_cast<std::size_t>(a)] + ":" + fmt(h - height[static_cast<std::size_t>(a)]) + "," +
                  text[static_cast<std::size_t>(b)] + ":" + fmt(h - height[static_cast<std::size_t>(b)]) + ")";
    }
    return text.back() + ";";
}

}  // namespace repsim
