#pragma once

#include <cstddef>
#include <vector>

#include "otcp/common.hpp"

namespace otcp::lap {

// Dense rectangular cost table, n_rows <= n_cols, finite non-negative
// entries.  Row i is a source point, column j a target.
class CostMatrix {
public:
    CostMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> entries);

    static CostMatrix squared_distances(const std::vector<Vec>& sources,
                                        const std::vector<Vec>& targets);

    double operator()(std::size_t i, std::size_t j) const {
        return entries_[i * n_cols_ + j];
    }
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    const double* data() const { return entries_.data(); }

private:
    std::size_t n_rows_;
    std::size_t n_cols_;
    std::vector<double> entries_;
};

struct Assignment {
    std::vector<int> mapping;  // row -> column, injective
    double total_cost = 0.0;
};

enum class TieBreak {
    Lexicographic,  // smallest mapping in row order among equal-cost optima
    Arbitrary,      // solver order; deterministic but unspecified
};

// Globally optimal assignment of every row to a distinct column.
Assignment solve_assignment(const CostMatrix& cost,
                            TieBreak tie = TieBreak::Lexicographic);

// Optimal cost after deleting column k (0-based) from an n x (n+1) table.
double solve_without_column(const CostMatrix& cost, std::size_t k);

struct LeaveOneOut {
    std::vector<double> costs;                  // costs[k]: optimum without column k
    std::vector<std::vector<int>> assignments;  // row -> column matching attaining it
};

// All n+1 leave-one-column-out optima of an n x (n+1) table in one pass:
// a single rectangular solve plus one shortest-path reroute per column.
// Values agree with solve_without_column; see the unit tests.
LeaveOneOut leave_one_out(const CostMatrix& cost);

}  // namespace otcp::lap
