#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// Ordinary least squares with intercept via normal equations in long double,
// solved by Gauss-Jordan elimination with partial pivoting. Returns
// (w_1..w_p, b).
inline std::vector<long double> least_squares(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const std::size_t n = x.size(), p = x.front().size(), q = p + 1;
  std::vector<std::vector<long double>> a(q, std::vector<long double>(q + 1, 0.0L));
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<long double> z(q);
    for (std::size_t k = 0; k < p; ++k) z[k] = x[r][k];
    z[p] = 1.0L;
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < q; ++j) a[i][j] += z[i] * z[j];
      a[i][q] += z[i] * static_cast<long double>(y[r]);
    }
  }
  for (std::size_t col = 0; col < q; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < q; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0L) throw std::runtime_error("singular oracle system");
    std::swap(a[piv], a[col]);
    for (std::size_t r = 0; r < q; ++r) {
      if (r == col) continue;
      const long double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= q; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<long double> sol(q);
  for (std::size_t i = 0; i < q; ++i) sol[i] = a[i][q] / a[i][i];
  return sol;
}

}  // namespace oracle
