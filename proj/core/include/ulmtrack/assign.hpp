#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ulmtrack/types.hpp"

namespace ulmtrack {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Rectangular pairing costs with a per-row and per-column price for staying
/// unassigned. Entries equal to kForbidden are gated out.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, double null_cost);
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_null,
             std::vector<double> col_null);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return costs_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return costs_[r * cols_ + c]; }

  double row_null(std::size_t r) const { return row_null_[r]; }
  double col_null(std::size_t c) const { return col_null_[c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> costs_;
  std::vector<double> row_null_;
  std::vector<double> col_null_;
};

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), ascending by row
  double total_cost = 0.0;
};

/// Objective of a partial matching: chosen costs plus null prices of every
/// unassigned row and column.
double assignment_cost(const CostMatrix& m, std::span<const std::pair<int, int>> pairs);

/// Globally optimal partial assignment. The rectangular problem is embedded in
/// a square (rows+cols) problem with dummy nodes for non-assignment and solved
/// by shortest augmenting paths with dual potentials.
Assignment solve_bipartite(const CostMatrix& m);

/// Normalised vector difference of three consecutive positions:
/// |L23 - L12| / (|L23| + |L12|), in [0, 2]. Throws std::invalid_argument when
/// all three points coincide.
double triplet_cost(const Vec2& p1, const Vec2& p2, const Vec2& p3);

struct Triplet {
  int i = 0;  // index into frame k-2
  int j = 0;  // index into frame k-1
  int k = 0;  // index into frame k
  double cost = 0.0;
};

struct TripletGate {
  double max_link_um = 0.0;  // both displacements must not exceed this
  double max_cost = 0.5;
};

/// Greedy disjoint triplet selection: enumerate gated candidates, sort by
/// (cost, i, j, k) and accept every candidate whose detections are all unused.
std::vector<Triplet> solve_triplets(std::span<const Vec2> f1, std::span<const Vec2> f2,
                                    std::span<const Vec2> f3, const TripletGate& gate);

}  // namespace ulmtrack
