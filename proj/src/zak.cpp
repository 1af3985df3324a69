#include "otfs_rach/zak.hpp"

#include <cmath>

#include "otfs_rach/numerics.hpp"

namespace otfs {

DDGrid::DDGrid(int M_, int N_) : M(M_), N(N_) {
  if (M_ < 1 || N_ < 1) throw DimensionError("DDGrid dimensions must be positive");
  values.assign(static_cast<std::size_t>(M_) * N_, cplx{});
}

CVec DDGrid::column(int k) const {
  CVec c(static_cast<std::size_t>(M));
  for (int l = 0; l < M; ++l) c[static_cast<std::size_t>(l)] = (*this)(l, k);
  return c;
}

CVec idzt(const DDGrid& grid) {
  const int M = grid.M;
  const int N = grid.N;
  if (grid.values.size() != static_cast<std::size_t>(M) * N) throw DimensionError("idzt: grid storage size mismatch");
  CVec x(static_cast<std::size_t>(M) * N);
  CVec row(static_cast<std::size_t>(N));
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  for (int l = 0; l < M; ++l) {
    for (int k = 0; k < N; ++k) row[static_cast<std::size_t>(k)] = grid(l, k);
    ifft_inplace_unscaled(row);
    for (int m = 0; m < N; ++m) x[static_cast<std::size_t>(l + M * m)] = s * row[static_cast<std::size_t>(m)];
  }
  return x;
}

DDGrid dzt(std::span<const cplx> x, int M, int N) {
  if (M < 1 || N < 1) throw DimensionError("dzt: dimensions must be positive");
  if (x.size() != static_cast<std::size_t>(M) * N) {
    throw DimensionError("dzt: expected " + std::to_string(M * N) + " samples, got " + std::to_string(x.size()));
  }
  DDGrid g(M, N);
  CVec row(static_cast<std::size_t>(N));
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  for (int l = 0; l < M; ++l) {
    for (int m = 0; m < N; ++m) row[static_cast<std::size_t>(m)] = x[static_cast<std::size_t>(l + M * m)];
    fft_inplace(row);
    for (int k = 0; k < N; ++k) g(l, k) = s * row[static_cast<std::size_t>(k)];
  }
  return g;
}

double max_abs_diff(const DDGrid& a, const DDGrid& b) {
  if (a.M != b.M || a.N != b.N) throw DimensionError("max_abs_diff: grid shapes differ");
  double e = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) e = std::max(e, std::abs(a.values[i] - b.values[i]));
  return e;
}

}  // namespace otfs
