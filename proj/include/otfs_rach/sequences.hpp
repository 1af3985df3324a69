#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otfs_rach/types.hpp"

namespace otfs {

bool is_prime(int n);

struct ZcRoot {
  int u = 1;
  int M = 139;

  // Validates 1 <= u <= M-1 and M prime.
  static ZcRoot make(int u, int M);
};

// x_u[l] = exp(-j pi u l (l+1) / M), l in [0, M).
CVec zc_sequence(const ZcRoot& root);

// `count` distinct roots for sequence length M. Default ordering is u = 1..count;
// a table replaces it (validated distinct and within [1, M-1]).
std::vector<ZcRoot> preamble_root_set(int M, int count,
                                      const std::optional<std::vector<int>>& table = std::nullopt);

// Root table file: one integer per line. Blank lines and '#' comments are skipped.
std::vector<int> load_root_table(const std::string& path);

// Length-2M reference [x_u ; exp(-j 2 pi k / N) x_u] used by the detector.
CVec extended_sequence(const ZcRoot& root, int k, int N);

}  // namespace otfs
