#include "otcp/lap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace otcp::lap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest-augmenting-path solver with potentials (Jonker-Volgenant style),
// O(n_rows * n_cols^2).  Indices are 1-based internally; column 0 is the
// virtual root.  On return the potentials are dual feasible
// (c_ij - u_i - v_j >= 0 up to rounding) and tight on matched arcs.
struct JvState {
    std::vector<int> row_to_col;  // 0-based
    std::vector<int> col_to_row;  // 0-based, -1 when free
    std::vector<double> u, v;     // 1-based potentials, entry 0 virtual
    double total = 0.0;
};

JvState jv_solve(std::size_t n, std::size_t m, const double* c) {
    JvState st;
    st.u.assign(n + 1, 0.0);
    st.v.assign(m + 1, 0.0);
    std::vector<int> match(m + 1, 0);  // column -> row, 1-based, 0 free
    std::vector<int> way(m + 1, 0);
    std::vector<double> minv(m + 1, 0.0);
    std::vector<char> used(m + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = static_cast<int>(i);
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = kInf;
            const double* row = c + (static_cast<std::size_t>(i0) - 1) * m;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - st.u[static_cast<std::size_t>(i0)] - st.v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = static_cast<int>(j);
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    st.u[static_cast<std::size_t>(match[j])] += delta;
                    st.v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    st.row_to_col.assign(n, -1);
    st.col_to_row.assign(m, -1);
    for (std::size_t j = 1; j <= m; ++j) {
        if (match[j] != 0) {
            st.row_to_col[static_cast<std::size_t>(match[j]) - 1] = static_cast<int>(j) - 1;
            st.col_to_row[j - 1] = match[j] - 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        st.total += c[i * m + static_cast<std::size_t>(st.row_to_col[i])];
    return st;
}

double value_with_forced_prefix(std::size_t n, std::size_t m, const double* c,
                                const std::vector<int>& forced_cols, std::size_t next_row) {
    // Optimum of the subproblem on rows next_row..n-1 over the columns not in
    // forced_cols.  Rows before next_row are already fixed by the caller.
    std::vector<char> taken(m, 0);
    for (int j : forced_cols) taken[static_cast<std::size_t>(j)] = 1;
    const std::size_t sub_n = n - next_row;
    if (sub_n == 0) return 0.0;
    std::vector<int> col_ids;
    col_ids.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
        if (!taken[j]) col_ids.push_back(static_cast<int>(j));
    std::vector<double> sub(sub_n * col_ids.size());
    for (std::size_t i = 0; i < sub_n; ++i)
        for (std::size_t j = 0; j < col_ids.size(); ++j)
            sub[i * col_ids.size() + j] =
                c[(next_row + i) * m + static_cast<std::size_t>(col_ids[j])];
    return jv_solve(sub_n, col_ids.size(), sub.data()).total;
}

std::vector<int> lex_smallest_optimal(std::size_t n, std::size_t m, const double* c,
                                      double optimum) {
    const double tol = 1e-9 * std::max(1.0, std::fabs(optimum));
    std::vector<int> chosen;
    chosen.reserve(n);
    double prefix = 0.0;
    std::vector<char> taken(m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        bool done = false;
        for (std::size_t j = 0; j < m && !done; ++j) {
            if (taken[j]) continue;
            chosen.push_back(static_cast<int>(j));
            const double rest = value_with_forced_prefix(n, m, c, chosen, i + 1);
            if (prefix + c[i * m + j] + rest <= optimum + tol) {
                prefix += c[i * m + j];
                taken[j] = 1;
                done = true;
            } else {
                chosen.pop_back();
            }
        }
        if (!done) throw std::logic_error("lexicographic refinement lost the optimum");
    }
    return chosen;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> entries)
    : n_rows_(n_rows), n_cols_(n_cols), entries_(std::move(entries)) {
    if (n_rows_ == 0) throw std::invalid_argument("cost matrix needs at least one row");
    if (n_rows_ > n_cols_)
        throw std::invalid_argument("cost matrix must have n_rows <= n_cols");
    if (entries_.size() != n_rows_ * n_cols_)
        throw std::invalid_argument("cost matrix entry count mismatch");
    for (double x : entries_) {
        if (!std::isfinite(x)) throw std::invalid_argument("cost matrix entry not finite");
        if (x < 0.0) throw std::invalid_argument("cost matrix entry negative");
    }
}

CostMatrix CostMatrix::squared_distances(const std::vector<Vec>& sources,
                                         const std::vector<Vec>& targets) {
    std::vector<double> e;
    e.reserve(sources.size() * targets.size());
    for (const auto& s : sources)
        for (const auto& t : targets) e.push_back(sq_dist(s, t));
    return CostMatrix(sources.size(), targets.size(), std::move(e));
}

Assignment solve_assignment(const CostMatrix& cost, TieBreak tie) {
    const std::size_t n = cost.n_rows(), m = cost.n_cols();
    JvState st = jv_solve(n, m, cost.data());
    Assignment out;
    out.total_cost = st.total;
    if (tie == TieBreak::Arbitrary) {
        out.mapping = std::move(st.row_to_col);
        return out;
    }
    out.mapping = lex_smallest_optimal(n, m, cost.data(), st.total);
    out.total_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        out.total_cost += cost(i, static_cast<std::size_t>(out.mapping[i]));
    return out;
}

double solve_without_column(const CostMatrix& cost, std::size_t k) {
    const std::size_t n = cost.n_rows(), m = cost.n_cols();
    if (m != n + 1)
        throw std::invalid_argument("solve_without_column expects n x (n+1)");
    if (k >= m) throw std::out_of_range("column index out of range");
    std::vector<double> sub;
    sub.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (j != k) sub.push_back(cost(i, j));
    return jv_solve(n, n, sub.data()).total;
}

LeaveOneOut leave_one_out(const CostMatrix& cost) {
    const std::size_t n = cost.n_rows(), m = cost.n_cols();
    if (m != n + 1)
        throw std::invalid_argument("leave_one_out expects n x (n+1)");
    const double* c = cost.data();
    JvState st = jv_solve(n, m, c);

    int free_col = -1;
    for (std::size_t j = 0; j < m; ++j)
        if (st.col_to_row[j] < 0) free_col = static_cast<int>(j);

    LeaveOneOut out;
    out.costs.assign(m, 0.0);
    out.assignments.assign(m, {});

    // Reduced costs; tiny negatives are rounding noise from the solve.
    auto reduced = [&](std::size_t i, std::size_t j) {
        return std::max(0.0, c[i * m + j] - st.u[i + 1] - st.v[j + 1]);
    };

    std::vector<double> dist(m);
    std::vector<int> prev_col(m);
    std::vector<char> settled(m);

    for (std::size_t k = 0; k < m; ++k) {
        if (static_cast<int>(k) == free_col) {
            out.costs[k] = st.total;
            out.assignments[k] = st.row_to_col;
            continue;
        }
        // Deleting a matched column frees its row; reroute that row to the
        // free column along the cheapest alternating path (Dijkstra on
        // reduced costs, column k excluded).
        const int freed_row = st.col_to_row[k];
        std::fill(settled.begin(), settled.end(), 0);
        std::fill(prev_col.begin(), prev_col.end(), -1);
        for (std::size_t j = 0; j < m; ++j)
            dist[j] = (j == k) ? kInf : reduced(static_cast<std::size_t>(freed_row), j);
        settled[k] = 1;
        double d_free = kInf;
        while (true) {
            int jm = -1;
            double best = kInf;
            for (std::size_t j = 0; j < m; ++j)
                if (!settled[j] && dist[j] < best) {
                    best = dist[j];
                    jm = static_cast<int>(j);
                }
            if (jm < 0) break;
            settled[static_cast<std::size_t>(jm)] = 1;
            if (jm == free_col) {
                d_free = best;
                break;
            }
            const int r = st.col_to_row[static_cast<std::size_t>(jm)];
            for (std::size_t j = 0; j < m; ++j) {
                if (settled[j]) continue;
                const double nd = best + reduced(static_cast<std::size_t>(r), j);
                if (nd < dist[j]) {
                    dist[j] = nd;
                    prev_col[j] = jm;
                }
            }
        }
        if (!std::isfinite(d_free))
            throw std::logic_error("leave_one_out reroute found no path");
        out.costs[k] = st.total + (st.v[static_cast<std::size_t>(free_col) + 1] -
                                   st.v[k + 1]) +
                       d_free;

        // Flip the path to materialize the matching without column k.
        std::vector<int> mapping = st.row_to_col;
        int j_cur = free_col;
        while (true) {
            const int j_prev = prev_col[static_cast<std::size_t>(j_cur)];
            const int r = (j_prev < 0) ? freed_row : st.col_to_row[static_cast<std::size_t>(j_prev)];
            mapping[static_cast<std::size_t>(r)] = j_cur;
            if (j_prev < 0) break;
            j_cur = j_prev;
        }
        out.assignments[k] = std::move(mapping);
    }
    return out;
}

}  // namespace otcp::lap
