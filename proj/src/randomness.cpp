#include "sfl/randomness.hpp"

#include <cmath>
#include <sstream>

namespace sfl {

namespace {

inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = (uint64_t)a * b;
  hi = (uint32_t)(p >> 32);
  lo = (uint32_t)p;
}

// Maps 64 random bits to (0,1), never 0 so the log in Box-Muller stays finite.
inline double to_unit(uint32_t hi, uint32_t lo) {
  uint64_t bits = (((uint64_t)hi << 32) | lo) >> 11;
  return ((double)bits + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

void philox4x32(const uint32_t ctr[4], const uint32_t key[2], uint32_t out[4]) {
  uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(0xD2511F53u, c0, hi0, lo0);
    mulhilo(0xCD9E8D57u, c2, hi1, lo1);
    uint32_t n0 = hi1 ^ c1 ^ k0;
    uint32_t n2 = hi0 ^ c3 ^ k1;
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c3;
}

uint64_t root_hash(uint64_t seed) { return mix64(seed ^ 0x6A09E667F3BCC908ull); }

uint64_t child_hash(uint64_t parent, int level, uint64_t index) {
  uint64_t tag = mix64(((uint64_t)(uint32_t)level << 56) ^ index ^ 0x3C6EF372FE94F82Bull);
  return mix64(parent ^ tag);
}

StreamKey StreamKey::root(uint64_t seed) {
  StreamKey k;
  k.seed = seed;
  k.hash = root_hash(seed);
  return k;
}

StreamKey StreamKey::child(int level, uint64_t index) const {
  StreamKey k = *this;
  k.path.emplace_back(level, index);
  k.hash = child_hash(hash, level, index);
  return k;
}

std::string StreamKey::describe() const {
  std::ostringstream os;
  os << "seed=" << seed;
  for (auto& [lv, ix] : path) os << "/(" << lv << "," << ix << ")";
  return os.str();
}

void fill_normals(uint64_t hash, uint32_t domain, int count, double* out) {
  const uint32_t key[2] = {(uint32_t)hash, (uint32_t)(hash >> 32)};
  for (int i = 0, block = 0; i < count; i += 2, ++block) {
    const uint32_t ctr[4] = {(uint32_t)block, 0u, domain, 0x5F3759DFu};
    uint32_t r[4];
    philox4x32(ctr, key, r);
    double u1 = to_unit(r[0], r[1]);
    double u2 = to_unit(r[2], r[3]);
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586 * u2;
    out[i] = rad * std::cos(ang);
    if (i + 1 < count) out[i + 1] = rad * std::sin(ang);
  }
}

void fill_level(uint64_t hash, int n, int m, double* out) { fill_normals(hash, kDomainLevel, 1 + m + n, out); }

LevelDraw sample_level(const StreamKey& key, int level, int n, int m, int r) {
  if (level < 1 || level > r + 1)
    throw Error(ErrorCode::IndexOutOfRange, "level " + std::to_string(level) + " outside 1..r+1");
  if (n < 1 || m < 1) throw Error(ErrorCode::EmptyDimension, "n and m must be positive");
  std::vector<double> buf(1 + m + n);
  fill_level(key.hash, n, m, buf.data());
  LevelDraw d;
  d.u4 = buf[0];
  d.u2.assign(buf.begin() + 1, buf.begin() + 1 + m);
  d.h.assign(buf.begin() + 1 + m, buf.end());
  return d;
}

Vec sample_G(const StreamKey& key, int n, int m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::EmptyDimension, "n and m must be positive");
  Vec g((size_t)m * n);
  fill_normals(key.hash, kDomainG, m * n, g.data());
  return g;
}

GaussianBlock sample_block(const StreamKey& key, int n, int m, int r) {
  GaussianBlock b;
  b.n = n;
  b.m = m;
  b.G = sample_G(key, n, m);
  for (int k = 1; k <= r + 1; ++k) b.levels.push_back(sample_level(key.child(k, 0), k, n, m, r));
  return b;
}

bool IbpReport::pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return !entries.empty();
}

IbpReport ibp_selfcheck(long N, uint64_t seed) {
  if (N < 1000) throw Error(ErrorCode::IndexOutOfRange, "ibp_selfcheck needs N >= 1000");
  struct Fn {
    const char* name;
    double (*f)(double);
    double (*df)(double);
  };
  static const Fn fns[] = {
      {"F(g)=g", [](double g) { return g; }, [](double) { return 1.0; }},
      {"F(g)=exp(0.3g)", [](double g) { return std::exp(0.3 * g); }, [](double g) { return 0.3 * std::exp(0.3 * g); }},
      {"F(g)=g^3", [](double g) { return g * g * g; }, [](double g) { return 3.0 * g * g; }},
  };
  IbpReport rep;
  rep.N = N;
  rep.seed = seed;
  std::vector<double> g(N);
  fill_normals(root_hash(seed), kDomainAux, (int)N, g.data());
  for (const auto& fn : fns) {
    double sl = 0, sr = 0, sd = 0, sdd = 0;
    for (long i = 0; i < N; ++i) {
      double a = g[i] * fn.f(g[i]);
      double b = fn.df(g[i]);
      sl += a;
      sr += b;
      sd += a - b;
      sdd += (a - b) * (a - b);
    }
    IbpEntry e;
    e.name = fn.name;
    e.lhs = sl / N;
    e.rhs = sr / N;
    e.diff = sd / N;
    double var = (sdd - N * e.diff * e.diff) / (N - 1);
    e.se = std::sqrt(std::max(var, 0.0) / N);
    e.z = e.se > 0 ? e.diff / e.se : 0.0;
    e.pass = std::abs(e.z) < 4.0;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace sfl
