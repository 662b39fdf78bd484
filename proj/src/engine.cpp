#include "sfl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "sfl/gauss_hermite.hpp"

namespace sfl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Layout of a node's statistics vector.
constexpr int OFF_SINGLE = 0;  // g1 pair products (4) and diagonal moments (3)
constexpr int N_SINGLE = 7;
constexpr int OFF_P1 = 7;
constexpr int OFF_P2 = 11;
constexpr int OFF_LIN = 15;

// Streaming self-normalized accumulator: keeps sum_j w_j v_j and sum_j w_j with
// w_j = exp(logw_j - mx), rescaling whenever a larger log-weight arrives.
struct WAcc {
  double mx = kNegInf;
  double sw = 0.0;
  double omega = 0.0;  // sum of base weights (sample count for Monte Carlo)
  double* s = nullptr;
  int dim = 0;

  void reset(double* buf, int d) {
    mx = kNegInf;
    sw = 0.0;
    omega = 0.0;
    s = buf;
    dim = d;
    std::fill(s, s + d, 0.0);
  }
  void add(double logw, double base, const double* v) {
    omega += base;
    if (logw > mx) {
      if (sw > 0.0) {
        double sc = std::exp(mx - logw);
        sw *= sc;
        for (int i = 0; i < dim; ++i) s[i] *= sc;
      }
      mx = logw;
    }
    double w = std::exp(logw - mx);
    sw += w;
    for (int i = 0; i < dim; ++i) s[i] += w * v[i];
  }
  // log of the base-weighted mean of exp(logw - log base).
  double mean_log() const { return mx + std::log(sw) - std::log(omega); }
  double mean(int i) const { return s[i] / sw; }
};

// P = A merged with B; P.s must already point at storage of size A.dim.
void merge(const WAcc& a, const WAcc& b, WAcc& p) {
  p.mx = std::max(a.mx, b.mx);
  double fa = std::exp(a.mx - p.mx), fb = std::exp(b.mx - p.mx);
  p.sw = a.sw * fa + b.sw * fb;
  p.omega = a.omega + b.omega;
  for (int i = 0; i < p.dim; ++i) p.s[i] = a.s[i] * fa + b.s[i] * fb;
}

// softmax of p * L into g; returns logsumexp(p * L).
double softmax_scaled(const double* L, int l, double p, double* g) {
  double mx = kNegInf;
  for (int i = 0; i < l; ++i) mx = std::max(mx, p * L[i]);
  double acc = 0.0;
  for (int i = 0; i < l; ++i) {
    g[i] = std::exp(p * L[i] - mx);
    acc += g[i];
  }
  for (int i = 0; i < l; ++i) g[i] /= acc;
  return mx + std::log(acc);
}

}  // namespace

struct Engine::Impl {
  Config cfg;
  double t;
  SamplePlan plan;
  uint64_t seed;
  int l, n, m, r;
  double beta, s, p;
  Vec X, Y, xs, ys, sbf;
  Vec kb, ka, kc;  // per level k = 1..r+1 at index k-1
  double st;
  Vec mv;
  double denom;
  int LIN, DV;
  bool quad;
  const GaussHermite* gh = nullptr;
  std::vector<long> count;  // samples (or tensor nodes) per level, index k-1

  struct NodeOut {
    double lzp = 0.0, lzc = 0.0;
    double* v = nullptr;
  };

  struct Work {
    std::vector<Vec> B;      // per level k (index k): l*l
    std::vector<Vec> draw;   // per level
    std::vector<Vec> outv;   // node output vectors per level
    std::vector<Vec> accbuf; // per level: 3 * DV (A, B, pooled)
    Vec yu, xh, gx, logC0, logZ, rho, ybar, ynb, yn2, ybn2, pi, a, vec;
    Vec acc1buf;             // level 1: 3 * l * D1
    std::vector<WAcc> acc1;  // 3 * l
    Vec L[3], g00[3], tmp;
  };

  Impl(const Config& c, double t_, const SamplePlan& pl, uint64_t sd) : cfg(c), t(t_), plan(pl), seed(sd) {
    require_valid(cfg);
    validate_plan(plan, cfg);
    const auto& e = cfg.ensemble;
    l = e.l;
    n = e.n;
    m = e.m;
    r = cfg.schedule.r;
    beta = cfg.scalars.beta;
    s = cfg.scalars.s;
    p = cfg.scalars.p_exp;
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::ConfigError, "t outside [0,1]");
    mv = cfg.schedule.mvec;
    for (int k = 1; k <= r; ++k)
      if (!(mv[k] > 0.0)) throw Error(ErrorCode::DegenerateM, "m_k must be > 0 for k = 1..r");
    X.resize(l);
    Y.resize(l);
    xs.resize((size_t)l * n);
    ys.resize((size_t)l * m);
    for (int i = 0; i < l; ++i) {
      X[i] = norm2(e.xs[i]);
      Y[i] = norm2(e.ys[i]);
      for (int d = 0; d < n; ++d) xs[(size_t)i * n + d] = e.xs[i][d];
      for (int d = 0; d < m; ++d) ys[(size_t)i * m + d] = e.ys[i][d];
    }
    sbf.resize((size_t)l * l);
    for (int i1 = 0; i1 < l; ++i1)
      for (int i3 = 0; i3 < l; ++i3) sbf[(size_t)i1 * l + i3] = s * beta * e.tilt_value(i1, i3);
    Coefficients co = derive_coefficients(cfg.schedule);
    st = std::sqrt(t);
    const double sc = std::sqrt(1.0 - t);
    for (int k = 0; k <= r; ++k) {
      kb.push_back(sc * co.b[k]);
      ka.push_back(st * co.a[k]);
      kc.push_back(sc * co.c[k]);
    }
    denom = p * std::abs(s) * std::sqrt((double)n) * mv[r];
    LIN = m + n + 1 + n * m;
    DV = OFF_LIN + LIN;
    quad = plan.is_quadrature();
    if (quad) {
      gh = &gauss_hermite(plan.nodes);
      for (int k = 1; k <= r + 1; ++k) {
        int d = 1 + m + n + (k == r + 1 ? m * n : 0);
        long c = 1;
        for (int i = 0; i < d; ++i) c *= plan.nodes;
        count.push_back(c);
      }
    } else {
      count = plan.N;
    }
  }

  void init_work(Work& w) const {
    w.B.assign(r + 2, Vec((size_t)l * l));
    w.draw.assign(r + 2, Vec(1 + m + n + m * n));
    w.outv.assign(r + 2, Vec(DV));
    w.accbuf.assign(r + 2, Vec(3 * (size_t)DV));
    w.yu.resize(l);
    w.xh.resize(l);
    w.gx.resize(m);
    w.logC0.resize(l);
    w.logZ.resize(l);
    w.rho.resize((size_t)l * l);
    w.ybar.resize((size_t)l * m);
    w.ynb.resize(l);
    w.yn2.resize(l);
    w.ybn2.resize(l);
    w.pi.resize(l);
    w.a.resize(l);
    w.vec.resize((size_t)l * (N_SINGLE + LIN));
    w.acc1buf.resize(3 * (size_t)l * (N_SINGLE + LIN));
    w.acc1.resize(3 * (size_t)l);
    for (auto& v : w.L) v.resize(l);
    for (auto& v : w.g00) v.resize(l);
    w.tmp.resize(DV);
  }

  // Fills u (level layout u4, u2, h, then G for the outer level) for sample idx of level k
  // under node hash H. Returns log of the base weight and the base weight itself.
  void draw(int k, long idx, uint64_t H, double* u, double& logw, double& base) const {
    const bool outer = (k == r + 1);
    if (!quad) {
      uint64_t hk = child_hash(H, k, (uint64_t)idx);
      fill_level(hk, n, m, u);
      if (outer) fill_normals(hk, kDomainG, m * n, u + 1 + m + n);
      logw = 0.0;
      base = 1.0;
      return;
    }
    const int d = 1 + m + n + (outer ? m * n : 0);
    const int K = plan.nodes;
    long rem = idx;
    double lw = 0.0;
    for (int i = 0; i < d; ++i) {
      int digit = (int)(rem % K);
      rem /= K;
      u[i] = gh->nodes[digit];
      lw += std::log(gh->weights[digit]);
    }
    logw = lw;
    base = std::exp(lw);
  }

  // Bout = Bin + level-k contribution of draw u (plus the G term at the outer level).
  void contrib(int k, const double* u, const double* Bin, double* Bout, bool decoupled, Work& w) const {
    const double u4 = u[0];
    const double* u2 = u + 1;
    const double* h = u + 1 + m;
    const double cb = kb[k - 1], ca = decoupled ? 0.0 : ka[k - 1], cc = kc[k - 1];
    for (int i2 = 0; i2 < l; ++i2) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += ys[(size_t)i2 * m + i] * u2[i];
      w.yu[i2] = acc;
    }
    for (int i1 = 0; i1 < l; ++i1) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += xs[(size_t)i1 * n + j] * h[j];
      w.xh[i1] = acc;
    }
    for (int i1 = 0; i1 < l; ++i1)
      for (int i2 = 0; i2 < l; ++i2)
        Bout[i1 * l + i2] = Bin[i1 * l + i2] + cb * X[i1] * w.yu[i2] + ca * u4 * X[i1] * Y[i2] + cc * Y[i2] * w.xh[i1];
    if (k == r + 1 && st != 0.0) {
      const double* G = u + 1 + m + n;
      for (int i1 = 0; i1 < l; ++i1) {
        for (int i = 0; i < m; ++i) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += G[(size_t)i * n + j] * xs[(size_t)i1 * n + j];
          w.gx[i] = acc;
        }
        for (int i2 = 0; i2 < l; ++i2) {
          double acc = 0.0;
          for (int i = 0; i < m; ++i) acc += ys[(size_t)i2 * m + i] * w.gx[i];
          Bout[i1 * l + i2] += st * acc;
        }
      }
    }
  }

  void pair(const double* u, const double* v, double* out) const {
    double yy = 0, xx = 0, ww = 0;
    for (int i = 0; i < m; ++i) yy += u[i] * v[i];
    for (int i = m; i < m + n; ++i) xx += u[i] * v[i];
    const double nn = u[m + n] * v[m + n];
    for (int i = m + n + 1; i < LIN; ++i) ww += u[i] * v[i];
    out[0] = yy;
    out[1] = xx;
    out[2] = nn;
    out[3] = ww;
  }

  // Per-i3 statistics of one level-1 sample: [g1 products(4) | diag(3) | LIN]. B1 holds the
  // full exponent base, logC0/logZ are already computed.
  void sample_stats(const double* B1, bool with_lin, Work& w) const {
    const int D1 = N_SINGLE + (with_lin ? LIN : 0);
    for (int i1 = 0; i1 < l; ++i1) {
      double* yb = &w.ybar[(size_t)i1 * m];
      std::fill(yb, yb + m, 0.0);
      double nb = 0.0, n2 = 0.0;
      for (int i2 = 0; i2 < l; ++i2) {
        double rho = std::exp(beta * B1[i1 * l + i2] - w.logC0[i1]);
        const double* y = &ys[(size_t)i2 * m];
        for (int i = 0; i < m; ++i) yb[i] += rho * y[i];
        nb += rho * Y[i2];
        n2 += rho * Y[i2] * Y[i2];
      }
      double b2 = 0.0;
      for (int i = 0; i < m; ++i) b2 += yb[i] * yb[i];
      w.ynb[i1] = nb;
      w.yn2[i1] = n2;
      w.ybn2[i1] = b2;
    }
    // LIN always built (needed for the g1 products); only stored when with_lin.
    Vec& lin = w.tmp;
    for (int i3 = 0; i3 < l; ++i3) {
      double* v = &w.vec[(size_t)i3 * D1];
      std::fill(lin.begin(), lin.begin() + LIN, 0.0);
      double d01 = 0, d02a = 0, d02b = 0;
      for (int i1 = 0; i1 < l; ++i1) {
        const double pi = std::exp(s * w.logC0[i1] + sbf[(size_t)i1 * l + i3] - w.logZ[i3]);
        const double* yb = &w.ybar[(size_t)i1 * m];
        const double* x = &xs[(size_t)i1 * n];
        const double px = pi * X[i1];
        for (int i = 0; i < m; ++i) lin[i] += px * yb[i];
        const double py = pi * w.ynb[i1];
        for (int j = 0; j < n; ++j) lin[m + j] += py * x[j];
        lin[m + n] += px * w.ynb[i1];
        double* W = &lin[m + n + 1];
        for (int j = 0; j < n; ++j) {
          const double pxj = pi * x[j];
          for (int i = 0; i < m; ++i) W[j * m + i] += pxj * yb[i];
        }
        const double x2 = X[i1] * X[i1] * pi;
        d01 += x2 * w.yn2[i1];
        d02a += x2 * w.ybn2[i1];
        d02b += x2 * w.ynb[i1] * w.ynb[i1];
      }
      pair(lin.data(), lin.data(), v);
      v[4] = d01;
      v[5] = d02a;
      v[6] = d02b;
      if (with_lin) std::copy(lin.begin(), lin.begin() + LIN, v + N_SINGLE);
    }
  }

  // Level-1 node: loops over U_1 samples under hash H.
  void level1(const double* Bpar, uint64_t H, int S, bool stats, bool dec, Work& w, NodeOut& out) const {
    const int nb = (S == 1 && !quad) ? 2 : 1;
    const bool with_lin = stats && S >= 1;
    const int D1 = stats ? N_SINGLE + (with_lin ? LIN : 0) : 0;
    const long N = count[0];
    const double m1 = mv[1];
    for (int b = 0; b < nb; ++b)
      for (int i3 = 0; i3 < l; ++i3)
        w.acc1[b * l + i3].reset(&w.acc1buf[((size_t)b * l + i3) * D1], D1);
    double* B1 = w.B[1].data();
    double* u = w.draw[1].data();
    for (int b = 0; b < nb; ++b) {
      for (long j = 0; j < N; ++j) {
        double lw, base;
        draw(1, j + b * N, H, u, lw, base);
        contrib(1, u, Bpar, B1, dec, w);
        for (int i1 = 0; i1 < l; ++i1) {
          const double* row = B1 + i1 * l;
          double mx = kNegInf;
          for (int i2 = 0; i2 < l; ++i2) mx = std::max(mx, beta * row[i2]);
          double acc = 0.0;
          for (int i2 = 0; i2 < l; ++i2) acc += std::exp(beta * row[i2] - mx);
          w.logC0[i1] = mx + std::log(acc);
        }
        for (int i3 = 0; i3 < l; ++i3) {
          double mx = kNegInf;
          for (int i1 = 0; i1 < l; ++i1) {
            w.a[i1] = s * w.logC0[i1] + sbf[(size_t)i1 * l + i3];
            mx = std::max(mx, w.a[i1]);
          }
          double acc = 0.0;
          for (int i1 = 0; i1 < l; ++i1) acc += std::exp(w.a[i1] - mx);
          w.logZ[i3] = mx + std::log(acc);
        }
        if (stats) sample_stats(B1, with_lin, w);
        for (int i3 = 0; i3 < l; ++i3)
          w.acc1[b * l + i3].add(lw + m1 * w.logZ[i3], base, stats ? &w.vec[(size_t)i3 * D1] : nullptr);
      }
    }
    // Batch A
    for (int i3 = 0; i3 < l; ++i3) w.L[0][i3] = w.acc1[i3].mean_log();
    out.lzc = softmax_scaled(w.L[0].data(), l, p, w.g00[0].data());
    if (nb == 1) {
      out.lzp = out.lzc;
      if (!stats) return;
      std::fill(out.v, out.v + DV, 0.0);
      for (int i3 = 0; i3 < l; ++i3) {
        const WAcc& A = w.acc1[i3];
        const double g = w.g00[0][i3];
        for (int c = 0; c < N_SINGLE; ++c) out.v[OFF_SINGLE + c] += g * A.mean(c);
        if (with_lin)
          for (int c = 0; c < LIN; ++c) out.v[OFF_LIN + c] += g * A.mean(N_SINGLE + c);
      }
      if (S == 1) {  // quadrature: both replica batches are the same exact integral
        double* linA = w.tmp.data();
        std::fill(linA, linA + LIN, 0.0);
        for (int i3 = 0; i3 < l; ++i3)
          for (int c = 0; c < LIN; ++c) linA[c] += w.g00[0][i3] * w.acc1[i3].mean(N_SINGLE + c);
        pair(linA, linA, out.v + OFF_P1);
        double pr[4];
        for (int i3 = 0; i3 < l; ++i3) {
          const double* la = w.acc1[i3].s + N_SINGLE;
          const double inv = 1.0 / (w.acc1[i3].sw * w.acc1[i3].sw);
          pair(la, la, pr);
          for (int c = 0; c < 4; ++c) out.v[OFF_P2 + c] += w.g00[0][i3] * pr[c] * inv;
        }
        std::fill(out.v + OFF_LIN, out.v + DV, 0.0);
      }
      return;
    }
    // Split at level 1: batches A, B and pooled P.
    for (int i3 = 0; i3 < l; ++i3) {
      const WAcc& A = w.acc1[i3];
      const WAcc& Bq = w.acc1[l + i3];
      WAcc& P = w.acc1[2 * l + i3];
      P.s = &w.acc1buf[((size_t)2 * l + i3) * D1];
      P.dim = D1;
      merge(A, Bq, P);
      w.L[1][i3] = Bq.mean_log();
      w.L[2][i3] = P.mean_log();
    }
    softmax_scaled(w.L[1].data(), l, p, w.g00[1].data());
    out.lzp = softmax_scaled(w.L[2].data(), l, p, w.g00[2].data());
    if (!stats) return;
    std::fill(out.v, out.v + DV, 0.0);
    double* linA = w.tmp.data();
    Vec linB(LIN, 0.0);
    std::fill(linA, linA + LIN, 0.0);
    double pr[4];
    for (int i3 = 0; i3 < l; ++i3) {
      const WAcc& A = w.acc1[i3];
      const WAcc& Bq = w.acc1[l + i3];
      const WAcc& P = w.acc1[2 * l + i3];
      const double gp = w.g00[2][i3];
      for (int c = 0; c < N_SINGLE; ++c) out.v[OFF_SINGLE + c] += gp * P.mean(c);
      const double ia = 1.0 / A.sw, ib = 1.0 / Bq.sw;
      for (int c = 0; c < LIN; ++c) {
        linA[c] += w.g00[0][i3] * A.s[N_SINGLE + c] * ia;
        linB[c] += w.g00[1][i3] * Bq.s[N_SINGLE + c] * ib;
      }
      pair(A.s + N_SINGLE, Bq.s + N_SINGLE, pr);
      for (int c = 0; c < 4; ++c) out.v[OFF_P2 + c] += gp * pr[c] * ia * ib;
    }
    pair(linA, linB.data(), out.v + OFF_P1);
  }

  // Node at level k >= 2: loops over U_k samples, recursing into level k-1.
  void node(int k, const double* Bpar, uint64_t H, int S, bool stats, bool dec, Work& w, NodeOut& out) const {
    if (k == 1) {
      level1(Bpar, H, S, stats, dec, w, out);
      return;
    }
    const int nb = (S == k && !quad) ? 2 : 1;
    const long N = count[k - 1];
    const double ratio = mv[k] / mv[k - 1];
    const int D = stats ? DV : 0;
    double* buf = w.accbuf[k].data();
    WAcc acc[3], canon;
    for (int b = 0; b < nb; ++b) acc[b].reset(buf + (size_t)b * DV, D);
    canon.reset(nullptr, 0);
    double* Bk = w.B[k].data();
    double* u = w.draw[k].data();
    NodeOut child;
    child.v = w.outv[k - 1].data();
    for (int b = 0; b < nb; ++b) {
      for (long j = 0; j < N; ++j) {
        double lw, base;
        draw(k, j + b * N, H, u, lw, base);
        contrib(k, u, Bpar, Bk, dec, w);
        const uint64_t hj = quad ? H : child_hash(H, k, (uint64_t)(j + b * N));
        node(k - 1, Bk, hj, S, stats, dec, w, child);
        acc[b].add(lw + ratio * child.lzp, base, stats ? child.v : nullptr);
        if (b == 0) canon.add(lw + ratio * child.lzc, base, nullptr);
      }
    }
    out.lzc = canon.mean_log();
    if (nb == 1) {
      out.lzp = acc[0].mean_log();
      if (!stats) return;
      for (int c = 0; c < DV; ++c) out.v[c] = acc[0].mean(c);
      if (S == k) {  // quadrature split at this level
        pair(out.v + OFF_LIN, out.v + OFF_LIN, out.v + OFF_P1);
        std::fill(out.v + OFF_P2, out.v + OFF_P2 + 4, 0.0);
        std::fill(out.v + OFF_LIN, out.v + DV, 0.0);
      }
      return;
    }
    acc[2].reset(buf + 2 * (size_t)DV, D);
    merge(acc[0], acc[1], acc[2]);
    out.lzp = acc[2].mean_log();
    if (!stats) return;
    for (int c = 0; c < N_SINGLE; ++c) out.v[OFF_SINGLE + c] = acc[2].mean(c);
    Vec la(LIN), lb(LIN);
    for (int c = 0; c < LIN; ++c) {
      la[c] = acc[0].mean(OFF_LIN + c);
      lb[c] = acc[1].mean(OFF_LIN + c);
    }
    pair(la.data(), lb.data(), out.v + OFF_P1);
    std::fill(out.v + OFF_P2, out.v + DV, 0.0);
  }

  long outer_count() const { return count[r]; }

  void outer_sample(long j, int S, bool stats, bool dec, Work& w, double& psi, double* chans, double& weight) const {
    const uint64_t R = root_hash(seed);
    double lw, base;
    double* u = w.draw[r + 1].data();
    draw(r + 1, j, R, u, lw, base);
    std::vector<double> zero((size_t)l * l, 0.0);
    double* Bo = w.B[r + 1].data();
    contrib(r + 1, u, zero.data(), Bo, dec, w);
    NodeOut out;
    out.v = w.outv[r].data();
    const uint64_t hj = quad ? R : child_hash(R, r + 1, (uint64_t)j);
    node(r, Bo, hj, S, stats, dec, w, out);
    psi = out.lzc / denom;
    weight = base;
    if (stats) {
      for (int c = 0; c < N_SINGLE; ++c) chans[G1_YY + c] = out.v[OFF_SINGLE + c];
      for (int c = 0; c < 4; ++c) {
        chans[P1_YY + c] = out.v[OFF_P1 + c];
        chans[P2_YY + c] = out.v[OFF_P2 + c];
      }
    }
  }
};

Engine::Engine(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed)
    : impl_(std::make_unique<Impl>(cfg, t, plan, seed)) {}
Engine::~Engine() = default;

long Engine::outer_count() const { return impl_->outer_count(); }

SweepResult Engine::run(const SweepOptions& opt) const {
  const Impl& I = *impl_;
  if (opt.split < 0 || opt.split > I.r)
    throw Error(ErrorCode::MeasureLevelMismatch, "split level outside 0..r");
  const long total = I.outer_count();
  const long b0 = std::max(0L, opt.outer_begin);
  const long b1 = opt.outer_end < 0 ? total : std::min(total, opt.outer_end);
  const long cnt = std::max(0L, b1 - b0);
  SweepResult res;
  res.split = opt.split;
  res.stats = opt.stats;
  res.psi.assign(cnt, 0.0);
  res.weights.assign(cnt, 0.0);
  if (opt.stats)
    for (auto& c : res.ch) c.assign(cnt, 0.0);
  const int T = std::max(1, (int)std::min<long>(worker_count(), std::max(1L, cnt)));
  auto work = [&](int tid) {
    Impl::Work w;
    I.init_work(w);
    double chans[kNumChannels] = {};
    for (long j = tid; j < cnt; j += T) {
      double psi, weight;
      I.outer_sample(b0 + j, opt.split, opt.stats, opt.decoupled, w, psi, chans, weight);
      res.psi[j] = psi;
      res.weights[j] = weight;
      if (opt.stats)
        for (int c = 0; c < kNumChannels; ++c) res.ch[c][j] = chans[c];
    }
  };
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> th;
    for (int i = 0; i < T; ++i) th.emplace_back(work, i);
    for (auto& x : th) x.join();
  }
  // Monte Carlo: equal weights. Quadrature: tensor weights, already summing to 1 over the full grid.
  if (!I.quad)
    for (auto& wv : res.weights) wv = 1.0 / (double)cnt;
  return res;
}

Zeta1Result Engine::zeta1(const GaussianBlock& outer, uint64_t key_hash, bool decoupled) const {
  const Impl& I = *impl_;
  if (outer.n != I.n || outer.m != I.m || (int)outer.levels.size() != I.r + 1)
    throw Error(ErrorCode::DimensionMismatch, "outer block does not match the config");
  Impl::Work w;
  I.init_work(w);
  Vec B((size_t)I.l * I.l, 0.0), B2((size_t)I.l * I.l);
  Vec u(1 + I.m + I.n + I.m * I.n);
  for (int k = I.r + 1; k >= 2; --k) {
    const auto& d = outer.levels[k - 1];
    u[0] = d.u4;
    std::copy(d.u2.begin(), d.u2.end(), u.begin() + 1);
    std::copy(d.h.begin(), d.h.end(), u.begin() + 1 + I.m);
    if (k == I.r + 1) std::copy(outer.G.begin(), outer.G.end(), u.begin() + 1 + I.m + I.n);
    I.contrib(k, u.data(), B.data(), B2.data(), decoupled, w);
    B.swap(B2);
  }
  Impl::NodeOut out;
  out.v = w.outv[1].data();
  I.level1(B.data(), key_hash, 0, false, decoupled, w, out);
  Zeta1Result z;
  z.log_zeta1 = out.lzc;
  z.log_inner_mean = w.L[0];
  return z;
}

}  // namespace sfl
