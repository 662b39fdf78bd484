#include "sfl/oracles.hpp"

#include <array>
#include <cmath>

#include "sfl/gauss_hermite.hpp"

namespace sfl {

OracleResult psi_beta0(const Config& c) {
  require_valid(c);
  if (c.scalars.beta != 0.0) throw Error(ErrorCode::RequiresBeta0, "psi_beta0 needs beta = 0");
  const double l = c.ensemble.l, s = c.scalars.s, p = c.scalars.p_exp, m1 = c.schedule.mvec[1];
  // log zeta_1 = log l + p m1 (1+s) log l; every further level only rescales by m_k / m_{k-1}.
  const double v = (1.0 + (1.0 + s) * m1 * p) * std::log(l) / (p * std::abs(s) * std::sqrt((double)c.ensemble.n) * m1);
  return {v, "closed-form-beta0"};
}

OracleResult psi_l1(const Config& c, double t) {
  require_valid(c);
  if (c.ensemble.l != 1) throw Error(ErrorCode::RequiresL1, "psi_l1 needs l = 1");
  const auto& e = c.ensemble;
  const auto& sc = c.schedule;
  const double beta = c.scalars.beta, s = c.scalars.s, p = c.scalars.p_exp;
  const double X2 = norm2(e.xs[0]) * norm2(e.xs[0]), Y2 = norm2(e.ys[0]) * norm2(e.ys[0]);
  const double f = e.tilt_value(0, 0);
  double acc = 0.0;
  for (int j = 1; j <= sc.r; ++j) {
    const double a2 = sc.pvec[j - 1] * sc.qvec[j - 1] - sc.pvec[j] * sc.qvec[j];
    const double b2 = sc.pvec[j - 1] - sc.pvec[j];
    const double c2 = sc.qvec[j - 1] - sc.qvec[j];
    const double v = X2 * Y2 * ((1.0 - t) * (b2 + c2) + t * a2);
    acc += sc.mvec[j] * (j == 1 ? 1.0 : p) * v / 2.0;
  }
  const double val = sign_of(s) * (beta * f + s * beta * beta * acc) / std::sqrt((double)e.n);
  return {val, "closed-form-l1"};
}

namespace {

// Pair functionals indexed like the measures module: 0 xy, 1 yx, 2 nn, 3 cross.
int pair_slot(Functional f) {
  switch (f) {
    case Functional::XY: return 0;
    case Functional::YX: return 1;
    case Functional::NN: return 2;
    case Functional::CROSS: return 3;
    default: return -1;
  }
}

struct NodeVal {
  double zc = 0.0, zp = 0.0;       // zeta_k, canonical and pooled
  std::array<double, 7> single{};  // g1 pairs (4), d01, d02a, d02b
  std::array<double, 4> p1{}, p2{};
  Vec W;                           // branch distribution over (i1,i2,i3) below the split
};

// Explicit nested evaluation of the zeta recursion and the measure definitions. Linear domain.
class Explicit {
 public:
  void set_swap(bool v) { swap_ = v; }
  Explicit(const Config& c, double t, int split, bool quad, const SamplePlan& plan, int nodes, bool factor_u4,
           bool decoupled)
      : c_(c), t_(t), S_(split), quad_(quad), plan_(plan), dec_(decoupled) {
    require_valid(c);
    const auto& e = c.ensemble;
    l_ = e.l;
    n_ = e.n;
    m_ = e.m;
    r_ = c.schedule.r;
    beta_ = c.scalars.beta;
    s_ = c.scalars.s;
    p_ = c.scalars.p_exp;
    X_.resize(l_);
    Y_.resize(l_);
    for (int i = 0; i < l_; ++i) {
      X_[i] = norm2(e.xs[i]);
      Y_[i] = norm2(e.ys[i]);
    }
    const auto& sc = c.schedule;
    for (int k = 1; k <= r_ + 1; ++k) {
      ak_.push_back(std::sqrt(std::max(0.0, sc.pvec[k - 1] * sc.qvec[k - 1] - sc.pvec[k] * sc.qvec[k])));
      bk_.push_back(std::sqrt(std::max(0.0, sc.pvec[k - 1] - sc.pvec[k])));
      ck_.push_back(std::sqrt(std::max(0.0, sc.qvec[k - 1] - sc.qvec[k])));
    }
    if (dec_) std::fill(ak_.begin(), ak_.end(), 0.0);
    factor_ = quad && factor_u4 && e.constant_magnitude();
    if (quad) {
      gh_ = &gauss_hermite(nodes);
      K_ = nodes;
    }
    // F tables over (i1,i2,p1,p2) and the diagonal pieces.
    F_.assign(4, Vec((size_t)l_ * l_ * l_ * l_));
    for (int i1 = 0; i1 < l_; ++i1)
      for (int i2 = 0; i2 < l_; ++i2)
        for (int p1 = 0; p1 < l_; ++p1)
          for (int p2 = 0; p2 < l_; ++p2) {
            double xx = 0, yy = 0;
            for (int d = 0; d < n_; ++d) xx += e.xs[p1][d] * e.xs[i1][d];
            for (int d = 0; d < m_; ++d) yy += e.ys[p2][d] * e.ys[i2][d];
            const size_t ix = idx4(i1, i2, p1, p2);
            F_[0][ix] = X_[i1] * X_[p1] * yy;
            F_[1][ix] = xx * Y_[i2] * Y_[p2];
            F_[2][ix] = X_[i1] * X_[p1] * Y_[i2] * Y_[p2];
            F_[3][ix] = xx * yy;
          }
    yy2_.assign((size_t)l_ * l_, 0.0);
    for (int i2 = 0; i2 < l_; ++i2)
      for (int p2 = 0; p2 < l_; ++p2) {
        double yy = 0;
        for (int d = 0; d < m_; ++d) yy += e.ys[p2][d] * e.ys[i2][d];
        yy2_[(size_t)i2 * l_ + p2] = yy;
      }
    tilt_.resize((size_t)l_ * l_);
    for (int i1 = 0; i1 < l_; ++i1)
      for (int i3 = 0; i3 < l_; ++i3) tilt_[(size_t)i1 * l_ + i3] = e.tilt_value(i1, i3);
  }

  bool factorized() const { return factor_; }

  // Constant added to psi by the u4 coordinates removed from the grid.
  double u4_constant() const {
    if (!factor_ || dec_) return 0.0;
    const double XY = X_[0] * Y_[0];
    const double st = std::sqrt(t_);
    const auto& mv = c_.schedule.mvec;
    auto kappa = [&](double lam) {
      double acc = 0.0;
      for (int i = 0; i < K_; ++i) acc += gh_->weights[i] * std::exp(lam * gh_->nodes[i]);
      return std::log(acc);
    };
    double total = p_ * kappa(mv[1] * s_ * beta_ * XY * st * ak_[0]);
    for (int k = 2; k <= r_; ++k) total = mv[k] / mv[k - 1] * total + kappa(p_ * mv[k] * s_ * beta_ * XY * st * ak_[k - 1]);
    return total;
  }

  // Value of the level-r node under one outer draw (u = u4, u2, h, G).
  NodeVal outer(const Vec& u, uint64_t H) {
    Vec B((size_t)l_ * l_, 0.0);
    add_level(r_ + 1, u, B);
    return node(r_, B, H);
  }

  // Outer draws: Monte Carlo sample j, or the full quadrature grid with weights.
  Vec outer_draw_mc(uint64_t R, long j, uint64_t& child) const {
    Vec u(1 + m_ + n_ + m_ * n_);
    child = child_hash(R, r_ + 1, (uint64_t)j);
    fill_level(child, n_, m_, u.data());
    fill_normals(child, kDomainG, m_ * n_, u.data() + 1 + m_ + n_);
    return u;
  }

  template <class Fn>
  void for_grid(int level, Fn&& fn) const {
    const bool outer = level == r_ + 1;
    const int dim = 1 + m_ + n_ + (outer ? m_ * n_ : 0);
    std::vector<int> free;
    for (int i = (factor_ ? 1 : 0); i < dim; ++i) free.push_back(i);
    long total = 1;
    for (size_t i = 0; i < free.size(); ++i) total *= K_;
    Vec u(dim, 0.0);
    for (long g = 0; g < total; ++g) {
      long rem = g;
      double w = 1.0;
      for (int i : free) {
        int d = (int)(rem % K_);
        rem /= K_;
        u[i] = gh_->nodes[d];
        w *= gh_->weights[d];
      }
      fn(u, w);
    }
  }

  double denom() const {
    return p_ * std::abs(s_) * std::sqrt((double)n_) * c_.schedule.mvec[r_];
  }

 private:
  size_t idx4(int a, int b, int c, int d) const { return (((size_t)a * l_ + b) * l_ + c) * l_ + d; }
  size_t idx3(int a, int b, int c) const { return ((size_t)a * l_ + b) * l_ + c; }

  void add_level(int k, const Vec& u, Vec& B) const {
    const auto& e = c_.ensemble;
    const double st = std::sqrt(t_), sc = std::sqrt(1.0 - t_);
    const double u4 = u[0];
    const double* u2 = u.data() + 1;
    const double* h = u.data() + 1 + m_;
    for (int i1 = 0; i1 < l_; ++i1)
      for (int i2 = 0; i2 < l_; ++i2) {
        double yu = 0, xh = 0;
        for (int d = 0; d < m_; ++d) yu += e.ys[i2][d] * u2[d];
        for (int d = 0; d < n_; ++d) xh += e.xs[i1][d] * h[d];
        double v = sc * bk_[k - 1] * X_[i1] * yu + st * ak_[k - 1] * X_[i1] * Y_[i2] * u4 + sc * ck_[k - 1] * Y_[i2] * xh;
        if (k == r_ + 1) {
          const double* G = u.data() + 1 + m_ + n_;
          double yGx = 0;
          for (int a = 0; a < m_; ++a)
            for (int b = 0; b < n_; ++b) yGx += e.ys[i2][a] * G[(size_t)a * n_ + b] * e.xs[i1][b];
          v += st * yGx;
        }
        B[(size_t)i1 * l_ + i2] += v;
      }
  }

  struct Sample {
    Vec u;
    double w;
    uint64_t hash;
  };

  // Samples of level k under node hash H. For a Monte Carlo split level, batch A is the first half.
  std::vector<Sample> samples(int k, uint64_t H) const {
    std::vector<Sample> out;
    if (quad_) {
      for_grid(k, [&](const Vec& u, double w) { out.push_back({u, w, 0}); });
      return out;
    }
    const long N = plan_.N[k - 1] * ((k == S_) ? 2 : 1);
    for (long j = 0; j < N; ++j) {
      Sample s;
      s.u.assign(1 + m_ + n_, 0.0);
      s.hash = child_hash(H, k, (uint64_t)j);
      fill_level(s.hash, n_, m_, s.u.data());
      s.w = 1.0;
      out.push_back(std::move(s));
    }
    return out;
  }

  static void guard(double v) {
    if (!std::isfinite(v) || v > 1e290) throw Error(ErrorCode::Overflow, "linear-domain value out of range");
  }

  struct Level1Sample {
    Vec g0;      // gamma_0(i1,i2;i3) at idx3(i1,i2,i3)
    Vec zm;      // Z_{i3}^{m1}
    double w;
  };

  Level1Sample level1_sample(const Vec& B) const {
    Level1Sample out;
    const double m1 = c_.schedule.mvec[1];
    Vec A((size_t)l_ * l_ * l_), C((size_t)l_ * l_), Z(l_, 0.0);
    for (int i1 = 0; i1 < l_; ++i1)
      for (int i3 = 0; i3 < l_; ++i3) {
        double cc = 0;
        for (int i2 = 0; i2 < l_; ++i2) {
          double a = std::exp(beta_ * (B[(size_t)i1 * l_ + i2] + tilt_[(size_t)i1 * l_ + i3]));
          guard(a);
          A[idx3(i1, i2, i3)] = a;
          cc += a;
        }
        C[(size_t)i1 * l_ + i3] = cc;
      }
    for (int i3 = 0; i3 < l_; ++i3)
      for (int i1 = 0; i1 < l_; ++i1) Z[i3] += std::pow(C[(size_t)i1 * l_ + i3], s_);
    out.g0.resize(A.size());
    out.zm.resize(l_);
    for (int i3 = 0; i3 < l_; ++i3) {
      out.zm[i3] = std::pow(Z[i3], m1);
      guard(out.zm[i3]);
      for (int i1 = 0; i1 < l_; ++i1) {
        const double cc = C[(size_t)i1 * l_ + i3];
        for (int i2 = 0; i2 < l_; ++i2)
          out.g0[idx3(i1, i2, i3)] = std::pow(cc, s_) / Z[i3] * A[idx3(i1, i2, i3)] / cc;
      }
    }
    return out;
  }

  // Batch averages at level 1: EZ(i3) = sum_j w_j Z_j^{m1} / sum_j w_j, and
  // V(i1,i2;i3) = sum_j w_j Z_j^{m1} gamma_0j / sum_j w_j Z_j^{m1}.
  void batch_average(const std::vector<Level1Sample>& xs, size_t b0, size_t b1, Vec& EZ, Vec& V) const {
    EZ.assign(l_, 0.0);
    V.assign((size_t)l_ * l_ * l_, 0.0);
    double wsum = 0.0;
    for (size_t j = b0; j < b1; ++j) {
      wsum += xs[j].w;
      for (int i3 = 0; i3 < l_; ++i3) {
        const double wz = xs[j].w * xs[j].zm[i3];
        EZ[i3] += wz;
        for (int i1 = 0; i1 < l_; ++i1)
          for (int i2 = 0; i2 < l_; ++i2) V[idx3(i1, i2, i3)] += wz * xs[j].g0[idx3(i1, i2, i3)];
      }
    }
    for (int i3 = 0; i3 < l_; ++i3) {
      for (int i1 = 0; i1 < l_; ++i1)
        for (int i2 = 0; i2 < l_; ++i2) V[idx3(i1, i2, i3)] /= EZ[i3];
      EZ[i3] /= wsum;
    }
  }

  // gamma_00 and zeta_1 from batch averages.
  double gamma00(const Vec& EZ, Vec& g00) const {
    g00.resize(l_);
    double z = 0.0;
    for (int i3 = 0; i3 < l_; ++i3) {
      g00[i3] = std::pow(EZ[i3], p_);
      z += g00[i3];
    }
    guard(z);
    for (double& g : g00) g /= z;
    return z;
  }

  // sum over six indices of Wa(i1,i2,i3) Wb(p1,p2,p3) F(i1,i2,p1,p2).
  void six_index(const Vec& Wa, const Vec& Wb, std::array<double, 4>& out) const {
    out.fill(0.0);
    for (int i1 = 0; i1 < l_; ++i1)
      for (int i2 = 0; i2 < l_; ++i2)
        for (int i3 = 0; i3 < l_; ++i3)
          for (int p1 = 0; p1 < l_; ++p1)
            for (int p2 = 0; p2 < l_; ++p2)
              for (int p3 = 0; p3 < l_; ++p3) {
                const double w = Wa[idx3(i1, i2, i3)] * Wb[idx3(p1, p2, p3)];
                for (int f = 0; f < 4; ++f) out[f] += w * F_[f][idx4(i1, i2, p1, p2)];
              }
  }

  NodeVal level1(const Vec& Bpar, uint64_t H) {
    auto ss = samples(1, H);
    std::vector<Level1Sample> xs;
    xs.reserve(ss.size());
    for (const auto& smp : ss) {
      Vec B = Bpar;
      add_level(1, smp.u, B);
      Level1Sample x = level1_sample(B);
      x.w = smp.w;
      xs.push_back(std::move(x));
    }
    NodeVal out;
    const bool split_here = (S_ == 1);
    const size_t half = (split_here && !quad_) ? xs.size() / 2 : xs.size();
    Vec EZa, Va, g00a;
    batch_average(xs, 0, half, EZa, Va);
    out.zc = gamma00(EZa, g00a);
    out.zp = out.zc;
    if (S_ == 0) {
      // Single-replica statistics: both replicas inside one sample.
      double wsum = 0;
      for (const auto& x : xs) wsum += x.w;
      for (int i3 = 0; i3 < l_; ++i3) {
        for (size_t j = 0; j < xs.size(); ++j) {
          const double wj = xs[j].w * xs[j].zm[i3] / (EZa[i3] * wsum);
          const double g = g00a[i3] * wj;
          const Vec& g0 = xs[j].g0;
          for (int i1 = 0; i1 < l_; ++i1) {
            double pi = 0;
            for (int i2 = 0; i2 < l_; ++i2) pi += g0[idx3(i1, i2, i3)];
            for (int i2 = 0; i2 < l_; ++i2) {
              const double a = g0[idx3(i1, i2, i3)];
              out.single[4] += g * a * X_[i1] * X_[i1] * Y_[i2] * Y_[i2];
              for (int p2 = 0; p2 < l_; ++p2) {
                const double rho2 = a * g0[idx3(i1, p2, i3)] / (pi * pi);
                out.single[5] += g * pi * rho2 * X_[i1] * X_[i1] * yy2_[(size_t)i2 * l_ + p2];
                out.single[6] += g * pi * rho2 * X_[i1] * X_[i1] * Y_[i2] * Y_[p2];
              }
              for (int p1 = 0; p1 < l_; ++p1)
                for (int p2 = 0; p2 < l_; ++p2) {
                  const double w = g * a * g0[idx3(p1, p2, i3)];
                  for (int f = 0; f < 4; ++f) out.single[f] += w * F_[f][idx4(i1, i2, p1, p2)];
                }
            }
          }
        }
      }
      return out;
    }
    if (S_ >= 2) {
      out.W.assign((size_t)l_ * l_ * l_, 0.0);
      for (int i1 = 0; i1 < l_; ++i1)
        for (int i2 = 0; i2 < l_; ++i2)
          for (int i3 = 0; i3 < l_; ++i3) out.W[idx3(i1, i2, i3)] = g00a[i3] * Va[idx3(i1, i2, i3)];
      return out;
    }
    // Split at level 1.
    Vec EZb = EZa, Vb = Va, g00b = g00a, EZp = EZa, g00p = g00a;
    if (!quad_) {
      Vec Vp;
      batch_average(xs, half, xs.size(), EZb, Vb);
      gamma00(EZb, g00b);
      batch_average(xs, 0, xs.size(), EZp, Vp);
      out.zp = gamma00(EZp, g00p);
    }
    Vec Wa((size_t)l_ * l_ * l_), Wb(Wa.size());
    for (int i1 = 0; i1 < l_; ++i1)
      for (int i2 = 0; i2 < l_; ++i2)
        for (int i3 = 0; i3 < l_; ++i3) {
          Wa[idx3(i1, i2, i3)] = g00a[i3] * Va[idx3(i1, i2, i3)];
          Wb[idx3(i1, i2, i3)] = g00b[i3] * Vb[idx3(i1, i2, i3)];
        }
    if (swap_) six_index(Wb, Wa, out.p1);
    else six_index(Wa, Wb, out.p1);
    out.p2.fill(0.0);
    for (int i3 = 0; i3 < l_; ++i3)
      for (int i1 = 0; i1 < l_; ++i1)
        for (int i2 = 0; i2 < l_; ++i2)
          for (int p1 = 0; p1 < l_; ++p1)
            for (int p2 = 0; p2 < l_; ++p2) {
              const double w = swap_ ? g00p[i3] * Vb[idx3(i1, i2, i3)] * Va[idx3(p1, p2, i3)]
                                     : g00p[i3] * Va[idx3(i1, i2, i3)] * Vb[idx3(p1, p2, i3)];
              for (int f = 0; f < 4; ++f) out.p2[f] += w * F_[f][idx4(i1, i2, p1, p2)];
            }
    return out;
  }

  NodeVal node(int k, const Vec& Bpar, uint64_t H) {
    if (k == 1) return level1(Bpar, H);
    const double ratio = c_.schedule.mvec[k] / c_.schedule.mvec[k - 1];
    auto ss = samples(k, H);
    std::vector<NodeVal> kids;
    Vec wz, wc;
    for (const auto& smp : ss) {
      Vec B = Bpar;
      add_level(k, smp.u, B);
      kids.push_back(node(k - 1, B, smp.hash));
      wz.push_back(smp.w * std::pow(kids.back().zp, ratio));
      wc.push_back(smp.w * std::pow(kids.back().zc, ratio));
      guard(wz.back());
    }
    const size_t half = (k == S_ && !quad_) ? ss.size() / 2 : ss.size();
    double base_a = 0, base_all = 0, za = 0, zall = 0;
    for (size_t j = 0; j < ss.size(); ++j) {
      base_all += ss[j].w;
      zall += wz[j];
      if (j < half) {
        base_a += ss[j].w;
        za += wc[j];
      }
    }
    NodeVal out;
    out.zc = za / base_a;
    out.zp = zall / base_all;
    if (k > S_) {
      for (size_t j = 0; j < ss.size(); ++j) {
        const double w = wz[j] / zall;
        for (int c = 0; c < 7; ++c) out.single[c] += w * kids[j].single[c];
        for (int c = 0; c < 4; ++c) {
          out.p1[c] += w * kids[j].p1[c];
          out.p2[c] += w * kids[j].p2[c];
        }
      }
      return out;
    }
    auto branch = [&](size_t b0, size_t b1) {
      Vec W((size_t)l_ * l_ * l_, 0.0);
      double tot = 0;
      for (size_t j = b0; j < b1; ++j) tot += wz[j];
      for (size_t j = b0; j < b1; ++j)
        for (size_t i = 0; i < W.size(); ++i) W[i] += wz[j] / tot * kids[j].W[i];
      return W;
    };
    if (k < S_) {
      out.W = branch(0, ss.size());
      return out;
    }
    Vec Wa = branch(0, half);
    Vec Wb = quad_ ? Wa : branch(half, ss.size());
    if (swap_) six_index(Wb, Wa, out.p1);
    else six_index(Wa, Wb, out.p1);
    return out;
  }

  bool swap_ = false;  // evaluate F(2,1) instead of F(1,2)
  const Config& c_;
  double t_;
  int S_;
  bool quad_;
  SamplePlan plan_;
  bool dec_;
  bool factor_ = false;
  const GaussHermite* gh_ = nullptr;
  int K_ = 0;
  int l_, n_, m_, r_;
  double beta_, s_, p_;
  Vec X_, Y_, ak_, bk_, ck_, yy2_, tilt_;
  std::vector<Vec> F_;
};

double pick(const NodeVal& v, const MeasureId& ms, Functional f) {
  switch (ms.kind) {
    case MeasureKind::G01:
      if (f == Functional::DIAG) return v.single[4];
      break;
    case MeasureKind::G02:
      if (f == Functional::X2YY) return v.single[5];
      if (f == Functional::X2NN) return v.single[6];
      break;
    case MeasureKind::G1:
      if (pair_slot(f) >= 0) return v.single[pair_slot(f)];
      break;
    case MeasureKind::G21:
    case MeasureKind::GK:
      if (pair_slot(f) >= 0) return v.p1[pair_slot(f)];
      break;
    case MeasureKind::G22:
      if (pair_slot(f) >= 0) return v.p2[pair_slot(f)];
      break;
  }
  throw Error(ErrorCode::UnsupportedFunctional, functional_name(f) + " is not defined under " + ms.name());
}

void check_measure(const MeasureId& ms, Functional f, int r) {
  if (ms.kind == MeasureKind::GK && (ms.k1 < 2 || ms.k1 > r))
    throw Error(ErrorCode::MeasureLevelMismatch, "gk(k1) needs 2 <= k1 <= r");
  NodeVal probe;
  pick(probe, ms, f);
}

void check_quadrature(const Config& c, int nodes) {
  const int dim = gaussian_dimension(c.ensemble.n, c.ensemble.m, c.schedule.r);
  if (dim > 12)
    throw Error(ErrorCode::DimensionTooLarge, "quadrature oracle needs dimension <= 12, got " + std::to_string(dim));
  if (nodes < 1) throw Error(ErrorCode::ConfigError, "quadrature needs at least one node");
}

}  // namespace

OracleResult quadrature_psi(const Config& c, double t, const QuadratureOptions& opt) {
  check_quadrature(c, opt.nodes);
  Explicit ex(c, t, 0, true, SamplePlan::quadrature(opt.nodes), opt.nodes, opt.factorize_u4, opt.decoupled);
  // psi only: split 0 carries single-replica sums that are not needed, so evaluate with split 0
  // and ignore them; their cost is small next to the tensor grid.
  double acc = 0.0;
  ex.for_grid(c.schedule.r + 1, [&](const Vec& u, double w) { acc += w * std::log(ex.outer(u, 0).zc); });
  return {(acc + ex.u4_constant()) / ex.denom(), "quadrature"};
}

OracleResult quadrature_overlap(const Config& c, double t, const MeasureId& ms, Functional f,
                                const QuadratureOptions& opt) {
  check_quadrature(c, opt.nodes);
  check_measure(ms, f, c.schedule.r);
  Explicit ex(c, t, ms.split(), true, SamplePlan::quadrature(opt.nodes), opt.nodes, opt.factorize_u4, opt.decoupled);
  double acc = 0.0;
  ex.for_grid(c.schedule.r + 1, [&](const Vec& u, double w) { acc += w * pick(ex.outer(u, 0), ms, f); });
  return {acc, "quadrature"};
}

OracleResult naive_overlap(const Config& c, double t, const SamplePlan& plan, uint64_t seed, long j,
                           const MeasureId& ms, Functional f, bool swap_replicas) {
  if (plan.is_quadrature()) throw Error(ErrorCode::ConfigError, "naive_overlap replays Monte Carlo draws");
  validate_plan(plan, c);
  check_measure(ms, f, c.schedule.r);
  if (c.ensemble.l > 3) throw Error(ErrorCode::ConfigError, "naive enumeration is limited to l <= 3");
  if (j < 0 || j >= plan.N.back()) throw Error(ErrorCode::IndexOutOfRange, "outer index outside the plan");
  Explicit ex(c, t, ms.split(), false, plan, 0, false, false);
  ex.set_swap(swap_replicas);
  uint64_t child = 0;
  Vec u = ex.outer_draw_mc(root_hash(seed), j, child);
  return {pick(ex.outer(u, child), ms, f), "naive-enumeration"};
}

}  // namespace sfl
