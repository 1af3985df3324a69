#include "otfs_rach/sequences.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace otfs {

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; static_cast<long long>(d) * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

ZcRoot ZcRoot::make(int u, int M) {
  if (!is_prime(M)) throw DomainError("ZC length M=" + std::to_string(M) + " is not prime");
  if (u < 1 || u > M - 1) {
    throw DomainError("ZC root u=" + std::to_string(u) + " outside [1, " + std::to_string(M - 1) + "]");
  }
  return ZcRoot{u, M};
}

CVec zc_sequence(const ZcRoot& root) {
  const int M = root.M;
  CVec x(static_cast<std::size_t>(M));
  for (int l = 0; l < M; ++l) {
    // Reduce u*l*(l+1) modulo 2M before scaling so the phase stays exact for large l.
    const long long e = (static_cast<long long>(root.u) * l * (l + 1)) % (2LL * M);
    x[static_cast<std::size_t>(l)] = std::polar(1.0, -kPi * static_cast<double>(e) / M);
  }
  return x;
}

std::vector<ZcRoot> preamble_root_set(int M, int count, const std::optional<std::vector<int>>& table) {
  if (count < 0) throw DomainError("preamble_root_set: negative count");
  if (count > M - 1) {
    throw CapacityError("requested " + std::to_string(count) + " roots but only " + std::to_string(M - 1) +
                        " exist for M=" + std::to_string(M));
  }
  std::vector<ZcRoot> roots;
  roots.reserve(static_cast<std::size_t>(count));
  if (!table) {
    for (int u = 1; u <= count; ++u) roots.push_back(ZcRoot::make(u, M));
    return roots;
  }
  if (static_cast<int>(table->size()) < count) {
    throw CapacityError("root table holds " + std::to_string(table->size()) + " entries, " +
                        std::to_string(count) + " requested");
  }
  std::set<int> seen;
  for (int i = 0; i < count; ++i) {
    const int u = (*table)[static_cast<std::size_t>(i)];
    if (!seen.insert(u).second) throw DomainError("root table repeats u=" + std::to_string(u));
    roots.push_back(ZcRoot::make(u, M));
  }
  return roots;
}

std::vector<int> load_root_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open root table '" + path + "'");
  std::vector<int> out;
  std::set<int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int u = 0;
    if (!(ss >> u)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected one integer");
    }
    std::string rest;
    if (ss >> rest) throw DomainError(path + ":" + std::to_string(lineno) + ": trailing content");
    if (u < 1) throw DomainError(path + ":" + std::to_string(lineno) + ": root must be positive");
    if (!seen.insert(u).second) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": duplicate root " + std::to_string(u));
    }
    out.push_back(u);
  }
  return out;
}

CVec extended_sequence(const ZcRoot& root, int k, int N) {
  if (N < 1) throw DomainError("extended_sequence: N must be positive");
  if (k < 0 || k >= N) throw DomainError("extended_sequence: Doppler index outside [0, N)");
  const CVec x = zc_sequence(root);
  const cplx ph = std::polar(1.0, -kTwoPi * k / N);
  CVec ext(2 * x.size());
  for (std::size_t l = 0; l < x.size(); ++l) {
    ext[l] = x[l];
    ext[l + x.size()] = ph * x[l];
  }
  return ext;
}

}  // namespace otfs
