#include "ulmtrack/assign.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace ulmtrack {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double null_cost)
    : CostMatrix(rows, cols, std::vector<double>(rows, null_cost),
                 std::vector<double>(cols, null_cost)) {}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_null,
                       std::vector<double> col_null)
    : rows_(rows),
      cols_(cols),
      costs_(rows * cols, kForbidden),
      row_null_(std::move(row_null)),
      col_null_(std::move(col_null)) {
  if (row_null_.size() != rows_ || col_null_.size() != cols_) {
    throw std::invalid_argument("null-cost vector size does not match matrix shape");
  }
  for (double v : row_null_) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("row null cost must be finite and >= 0");
  }
  for (double v : col_null_) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("column null cost must be finite and >= 0");
  }
}

double assignment_cost(const CostMatrix& m, std::span<const std::pair<int, int>> pairs) {
  std::vector<char> row_used(m.rows(), 0);
  std::vector<char> col_used(m.cols(), 0);
  double total = 0.0;
  for (const auto& [r, c] : pairs) {
    total += m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    row_used[static_cast<std::size_t>(r)] = 1;
    col_used[static_cast<std::size_t>(c)] = 1;
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!row_used[r]) total += m.row_null(r);
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!col_used[c]) total += m.col_null(c);
  }
  return total;
}

Assignment solve_bipartite(const CostMatrix& m) {
  const std::size_t nr = m.rows();
  const std::size_t nc = m.cols();
  const std::size_t n = nr + nc;
  Assignment result;
  if (n == 0) return result;

  // Square embedding (1-based for the potential method):
  //   real row r  : real col c -> m(r, c);  dummy col nc + r -> row_null(r)
  //   dummy row nr + c : real col c -> col_null(c);  any dummy col -> 0
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    if (i < nr) {
      if (j < nc) return m(i, j);
      return j - nc == i ? m.row_null(i) : kForbidden;
    }
    if (j < nc) return i - nr == j ? m.col_null(j) : kForbidden;
    return 0.0;
  };

  constexpr double inf = kForbidden;
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0);    // p[j]: row matched to column j
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double c = cost(i0 - 1, j - 1);
        if (c != inf) {
          const double cur = c - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      // The all-null solution is always feasible, so an augmenting path exists.
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= nc; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= nr) result.pairs.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  result.total_cost = assignment_cost(m, result.pairs);
  return result;
}

double triplet_cost(const Vec2& p1, const Vec2& p2, const Vec2& p3) {
  const Vec2 l12 = p2 - p1;
  const Vec2 l23 = p3 - p2;
  const double denom = l23.norm() + l12.norm();
  if (denom == 0.0) throw std::invalid_argument("triplet cost undefined for coincident points");
  return (l23 - l12).norm() / denom;
}

std::vector<Triplet> solve_triplets(std::span<const Vec2> f1, std::span<const Vec2> f2,
                                    std::span<const Vec2> f3, const TripletGate& gate) {
  std::vector<Triplet> candidates;
  const double g2 = gate.max_link_um * gate.max_link_um;
  for (std::size_t j = 0; j < f2.size(); ++j) {
    for (std::size_t i = 0; i < f1.size(); ++i) {
      if ((f2[j] - f1[i]).squaredNorm() > g2) continue;
      for (std::size_t k = 0; k < f3.size(); ++k) {
        if ((f3[k] - f2[j]).squaredNorm() > g2) continue;
        if (f1[i] == f2[j] && f2[j] == f3[k]) continue;
        const double c = triplet_cost(f1[i], f2[j], f3[k]);
        if (c <= gate.max_cost) {
          candidates.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k), c});
        }
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.cost, a.i, a.j, a.k) < std::tie(b.cost, b.i, b.j, b.k);
  });

  std::vector<char> used1(f1.size(), 0);
  std::vector<char> used2(f2.size(), 0);
  std::vector<char> used3(f3.size(), 0);
  std::vector<Triplet> chosen;
  for (const auto& t : candidates) {
    if (used1[t.i] || used2[t.j] || used3[t.k]) continue;
    used1[t.i] = used2[t.j] = used3[t.k] = 1;
    chosen.push_back(t);
  }
  return chosen;
}

}  // namespace ulmtrack
