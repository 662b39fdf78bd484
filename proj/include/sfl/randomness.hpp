#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfl/model.hpp"

namespace sfl {

// Identifies a node of the nested sampling tree. The 64-bit hash is a pure function of
// (seed, path) and keys the counter-based generator; the path is kept for diagnostics.
struct StreamKey {
  uint64_t seed = 0;
  std::vector<std::pair<int, uint64_t>> path;
  uint64_t hash = 0;

  static StreamKey root(uint64_t seed);
  // Forking rule: a child is identified by (level, sample index) appended to the path.
  StreamKey child(int level, uint64_t index) const;
  std::string describe() const;
};

uint64_t root_hash(uint64_t seed);
uint64_t child_hash(uint64_t parent, int level, uint64_t index);

// Stream domains: independent counter spaces under one key.
enum : uint32_t { kDomainLevel = 1, kDomainG = 2, kDomainAux = 3 };

// Fills out[0..count) with standard normals from (hash, domain). Deterministic in its inputs.
void fill_normals(uint64_t hash, uint32_t domain, int count, double* out);

// Philox4x32-10 block function.
void philox4x32(const uint32_t ctr[4], const uint32_t key[2], uint32_t out[4]);

struct LevelDraw {
  double u4 = 0.0;
  Vec u2;  // m entries
  Vec h;   // n entries
};

// One draw of G and every level's (u4, u2, h).
struct GaussianBlock {
  int n = 0, m = 0;
  Vec G;                         // m x n, row-major: G[i*n + j]
  std::vector<LevelDraw> levels; // levels[k-1] for k = 1..r+1
};

// Draws U_k for the node identified by key. level must lie in 1..r+1.
LevelDraw sample_level(const StreamKey& key, int level, int n, int m, int r);
// m x n matrix of standard normals, row-major.
Vec sample_G(const StreamKey& key, int n, int m);
GaussianBlock sample_block(const StreamKey& key, int n, int m, int r);

// Raw layout used by the nested engine: u4, u2[0..m), h[0..n) in one buffer.
inline int level_draw_size(int n, int m) { return 1 + m + n; }
void fill_level(uint64_t hash, int n, int m, double* out);

struct IbpEntry {
  std::string name;
  double lhs = 0, rhs = 0;  // E[g F(g)], E[F'(g)]
  double diff = 0, se = 0, z = 0;
  bool pass = false;
};

struct IbpReport {
  long N = 0;
  uint64_t seed = 0;
  std::vector<IbpEntry> entries;
  bool pass() const;
};

// Checks E[g F(g)] = E[F'(g)] for F(g) = g, exp(0.3 g), g^3.
IbpReport ibp_selfcheck(long N, uint64_t seed);

}  // namespace sfl
