#pragma once

#include <span>

#include "otfs_rach/types.hpp"

namespace otfs {

// M x N delay-Doppler grid, row-major: values[l * N + k].
struct DDGrid {
  int M = 0;
  int N = 0;
  CVec values;

  DDGrid() = default;
  DDGrid(int M_, int N_);

  cplx& operator()(int l, int k) { return values[static_cast<std::size_t>(l) * N + k]; }
  const cplx& operator()(int l, int k) const { return values[static_cast<std::size_t>(l) * N + k]; }

  CVec column(int k) const;
};

// x[l + M m] = (1/sqrt N) sum_k Z[l,k] exp(j 2 pi k m / N)
CVec idzt(const DDGrid& grid);

// Z[l,k] = (1/sqrt N) sum_m x[l + M m] exp(-j 2 pi m k / N). Exact inverse of idzt.
DDGrid dzt(std::span<const cplx> x, int M, int N);

double max_abs_diff(const DDGrid& a, const DDGrid& b);

}  // namespace otfs
