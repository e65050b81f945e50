// Copyright (c) 2026, repsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Exact solver for the uniform-marginal transportation problem
//
//     min  sum_kl P_kl C_kl   s.t.  P >= 0, rows sum to 1/m, columns to 1/n.
//
// Primal network simplex on the bipartite row/column graph. A basis is a
// spanning tree of m + n - 1 cells. Marginals are scaled to integers
// (row supply n, column demand m) and perturbed in the style of Orden
// (supply_i += eps, last demand += m*eps, eps = 1/(m+1) after integer
// scaling), which makes every basic solution nondegenerate: each pivot
// strictly lowers the cost and the method cannot cycle. The optimal tree is
// then re-solved with the unperturbed marginals.

#pragma once

#include "repsim/common.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace repsim {

struct TransportPlan {
    Matrix plan;        // m x n, nonnegative
    double cost = 0.0;  // sum_kl plan_kl * cost_kl
    std::size_t pivots = 0;
};

namespace transport_detail {

struct Cell {
    Index row;
    Index col;
};

// Node ids: rows are 0..m-1, columns are m..m+n-1.
class TreeBasis {
public:
    TreeBasis(Index m, Index n) : m_(m), n_(n), adj_(static_cast<std::size_t>(m + n)) {}

    void add(std::size_t cell_id, Index r, Index c) {
        adj_[static_cast<std::size_t>(r)].push_back({static_cast<std::size_t>(m_ + c), cell_id});
        adj_[static_cast<std::size_t>(m_ + c)].push_back({static_cast<std::size_t>(r), cell_id});
    }

    void remove(std::size_t cell_id, Index r, Index c) {
        erase(static_cast<std::size_t>(r), cell_id);
        erase(static_cast<std::size_t>(m_ + c), cell_id);
    }

    /// Roots the tree at node 0; fills parent node, parent edge, depth and a
    /// BFS order.
    void root(std::vector<std::size_t>& parent, std::vector<std::size_t>& parent_edge, std::vector<std::size_t>& depth,
              std::vector<std::size_t>& order) const {
        const std::size_t total = adj_.size();
        constexpr auto none = std::numeric_limits<std::size_t>::max();
        parent.assign(total, none);
        parent_edge.assign(total, none);
        depth.assign(total, 0);
        order.clear();
        order.reserve(total);
        std::vector<char> seen(total, 0);
        order.push_back(0);
        seen[0] = 1;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const std::size_t u = order[head];
            for (const auto& [v, e] : adj_[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    parent[v] = u;
                    parent_edge[v] = e;
                    depth[v] = depth[u] + 1;
                    order.push_back(v);
                }
            }
        }
        if (order.size() != total) {
            throw Error("transport: basis is not a spanning tree");
        }
    }

private:
    struct Edge {
        std::size_t to;
        std::size_t cell;
    };

    void erase(std::size_t node, std::size_t cell_id) {
        auto& list = adj_[node];
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (list[k].cell == cell_id) {
                list[k] = list.back();
                list.pop_back();
                return;
            }
        }
    }

    Index m_;
    Index n_;
    std::vector<std::vector<Edge>> adj_;
};

/// Solves flows on a spanning tree for the given integer supplies/demands by
/// repeatedly peeling leaves.
inline std::vector<long long> tree_flows(Index m, Index n, const std::vector<Cell>& cells,
                                         const std::vector<long long>& supply, const std::vector<long long>& demand) {
    const std::size_t total = static_cast<std::size_t>(m + n);
    std::vector<long long> residual(total);
    for (Index r = 0; r < m; ++r) {
        residual[static_cast<std::size_t>(r)] = supply[static_cast<std::size_t>(r)];
    }
    for (Index c = 0; c < n; ++c) {
        residual[static_cast<std::size_t>(m + c)] = demand[static_cast<std::size_t>(c)];
    }
    std::vector<std::vector<std::size_t>> incident(total);
    for (std::size_t e = 0; e < cells.size(); ++e) {
        incident[static_cast<std::size_t>(cells[e].row)].push_back(e);
        incident[static_cast<std::size_t>(m + cells[e].col)].push_back(e);
    }
    std::vector<std::size_t> degree(total);
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < total; ++v) {
        degree[v] = incident[v].size();
        if (degree[v] == 1) {
            stack.push_back(v);
        }
    }
    std::vector<long long> flow(cells.size(), 0);
    std::vector<char> done(cells.size(), 0);
    std::size_t solved = 0;
    while (!stack.empty() && solved < cells.size()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        if (degree[v] != 1) {
            continue;
        }
        std::size_t edge = cells.size();
        for (std::size_t e : incident[v]) {
            if (!done[e]) {
                edge = e;
                break;
            }
        }
        if (edge == cells.size()) {
            continue;
        }
        flow[edge] = residual[v];
        done[edge] = 1;
        ++solved;
        const std::size_t a = static_cast<std::size_t>(cells[edge].row);
        const std::size_t b = static_cast<std::size_t>(m + cells[edge].col);
        const std::size_t other = (v == a) ? b : a;
        residual[v] = 0;
        residual[other] -= flow[edge];
        degree[v] = 0;
        if (--degree[other] == 1) {
            stack.push_back(other);
        }
    }
    return flow;
}

}  // namespace transport_detail

/// Exact optimal plan for `cost` (m x n) with uniform marginals 1/m and 1/n.
inline TransportPlan solve_uniform_transport(const Matrix& cost, std::size_t max_pivots = 0) {
    using transport_detail::Cell;
    const Index m = cost.rows();
    const Index n = cost.cols();
    if (m < 1 || n < 1) {
        throw ValidationError("transport: empty cost matrix");
    }
    if (!cost.allFinite()) {
        throw ValidationError("transport: non-finite cost");
    }
    if (max_pivots == 0) {
        max_pivots = 50 * static_cast<std::size_t>((m + 1) * (n + 1)) + 1000;
    }

    // Integer marginals: every row supplies n units, every column demands m.
    // Perturbed by eps = 1/(m+1) after scaling everything by s = m + 1.
    const long long s = static_cast<long long>(m) + 1;
    std::vector<long long> supply(static_cast<std::size_t>(m), static_cast<long long>(n));
    std::vector<long long> demand(static_cast<std::size_t>(n), static_cast<long long>(m));
    std::vector<long long> psupply(supply.size());
    std::vector<long long> pdemand(demand.size());
    for (std::size_t r = 0; r < supply.size(); ++r) {
        psupply[r] = supply[r] * s + 1;
    }
    for (std::size_t c = 0; c < demand.size(); ++c) {
        pdemand[c] = demand[c] * s;
    }
    pdemand.back() += m;

    // North-west corner start; nondegenerate, so exactly m + n - 1 cells.
    std::vector<Cell> cells;
    std::vector<long long> flow;
    cells.reserve(static_cast<std::size_t>(m + n - 1));
    {
        auto rs = psupply;
        auto cd = pdemand;
        Index r = 0;
        Index c = 0;
        while (r < m && c < n) {
            const long long x = std::min(rs[static_cast<std::size_t>(r)], cd[static_cast<std::size_t>(c)]);
            cells.push_back({r, c});
            flow.push_back(x);
            rs[static_cast<std::size_t>(r)] -= x;
            cd[static_cast<std::size_t>(c)] -= x;
            if (rs[static_cast<std::size_t>(r)] == 0 && r + 1 < m) {
                ++r;
            } else if (cd[static_cast<std::size_t>(c)] == 0) {
                ++c;
            } else {
                ++r;
            }
        }
    }
    if (static_cast<Index>(cells.size()) != m + n - 1) {
        throw Error("transport: initial basis has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(m + n - 1));
    }

    transport_detail::TreeBasis tree(m, n);
    for (std::size_t e = 0; e < cells.size(); ++e) {
        tree.add(e, cells[e].row, cells[e].col);
    }

    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> parent_edge;
    std::vector<std::size_t> depth;
    std::vector<std::size_t> order;
    std::vector<double> potential(static_cast<std::size_t>(m + n));

    std::size_t pivots = 0;
    while (true) {
        tree.root(parent, parent_edge, depth, order);
        // Potentials: u_r + v_c = C_rc on basic cells, u_0 = 0.
        potential[0] = 0.0;
        for (std::size_t k = 1; k < order.size(); ++k) {
            const std::size_t v = order[k];
            const Cell& cell = cells[parent_edge[v]];
            potential[v] = cost(cell.row, cell.col) - potential[parent[v]];
        }
        // Dantzig entering rule; ties resolved by first (row, col).
        double best = -tol;
        Index er = -1;
        Index ec = -1;
        for (Index r = 0; r < m; ++r) {
            const double ur = potential[static_cast<std::size_t>(r)];
            for (Index c = 0; c < n; ++c) {
                const double reduced = cost(r, c) - ur - potential[static_cast<std::size_t>(m + c)];
                if (reduced < best) {
                    best = reduced;
                    er = r;
                    ec = c;
                }
            }
        }
        if (er < 0) {
            break;
        }
        if (++pivots > max_pivots) {
            throw Error("transport: network simplex did not converge after " + std::to_string(max_pivots) +
                        " pivots");
        }

        // Cycle = entering cell + tree path between its row and column node.
        // Edges on the column side alternate -,+,-,... starting next to the
        // column; on the row side the last edge (touching the row) is -.
        std::size_t a = static_cast<std::size_t>(er);
        std::size_t b = static_cast<std::size_t>(m + ec);
        std::vector<std::size_t> from_row;
        std::vector<std::size_t> from_col;
        while (a != b) {
            if (depth[a] >= depth[b]) {
                from_row.push_back(parent_edge[a]);
                a = parent[a];
            } else {
                from_col.push_back(parent_edge[b]);
                b = parent[b];
            }
        }
        // Cycle order: col -> ... -> lca -> ... -> row.
        std::vector<std::size_t> path = from_col;
        path.insert(path.end(), from_row.rbegin(), from_row.rend());
        // path[0] touches the column: sign -, then alternate.
        std::size_t leave = path.size();
        long long theta = std::numeric_limits<long long>::max();
        for (std::size_t k = 0; k < path.size(); k += 2) {
            if (flow[path[k]] < theta) {
                theta = flow[path[k]];
                leave = k;
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            flow[path[k]] += (k % 2 == 0) ? -theta : theta;
        }
        const std::size_t out_id = path[leave];
        tree.remove(out_id, cells[out_id].row, cells[out_id].col);
        cells[out_id] = {er, ec};
        flow[out_id] = theta;
        tree.add(out_id, er, ec);
    }

    // Re-solve the optimal tree with unperturbed marginals (units of 1/(m n)).
    const auto exact = transport_detail::tree_flows(m, n, cells, supply, demand);
    TransportPlan result;
    result.plan = Matrix::Zero(m, n);
    const double unit = 1.0 / (static_cast<double>(m) * static_cast<double>(n));
    for (std::size_t e = 0; e < cells.size(); ++e) {
        if (exact[e] < 0) {
            throw Error("transport: optimal basis infeasible for unperturbed marginals");
        }
        result.plan(cells[e].row, cells[e].col) += static_cast<double>(exact[e]) * unit;
    }
    result.cost = (result.plan.array() * cost.array()).sum();
    result.pivots = pivots;
    return result;
}

/// Squared Euclidean distances between the columns (units) of x and y.
inline Matrix unit_cost_matrix(const Matrix& x, const Matrix& y) {
    const Vector xn = x.colwise().squaredNorm().transpose();
    const Vector yn = y.colwise().squaredNorm().transpose();
    Matrix c = -2.0 * (x.transpose() * y);
    c.colwise() += xn;
    c.rowwise() += yn.transpose();
    return c.cwiseMax(0.0);
}

}  // namespace repsim
