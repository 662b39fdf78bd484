#include "sfl/measures.hpp"

#include <cmath>

namespace sfl {

BaseWeights base_weights(const LogPartitionTensor& lp, const ExponentTensor& ten, const ModelScalars& sc, double m1) {
  const int l = lp.l;
  if (ten.l != l) throw Error(ErrorCode::DimensionMismatch, "tensor and partition sizes differ");
  BaseWeights w;
  w.l = l;
  Vec a(l);
  for (int i3 = 0; i3 < l; ++i3) a[i3] = m1 * sc.p_exp * lp.logZ[i3];
  double lse = logsumexp(a);
  for (int i3 = 0; i3 < l; ++i3) w.gamma00.push_back(std::exp(a[i3] - lse));
  w.gamma0.assign((size_t)l * l * l, 0.0);
  for (int i1 = 0; i1 < l; ++i1)
    for (int i2 = 0; i2 < l; ++i2)
      for (int i3 = 0; i3 < l; ++i3) {
        const double logC = lp.logC[(size_t)i1 * l + i3];
        w.gamma0[((size_t)i1 * l + i2) * l + i3] =
            std::exp(sc.s * logC - lp.logZ[i3] + sc.beta * ten.at(i1, i2, i3) - logC);
      }
  return w;
}

MeasureId MeasureId::parse(const std::string& s) {
  if (s == "g01") return g01();
  if (s == "g02") return g02();
  if (s == "g1") return g1();
  if (s == "g2" || s == "g21") return g21();
  if (s == "g22") return g22();
  std::string digits;
  if (s.rfind("gk:", 0) == 0) digits = s.substr(3);
  else if (s.size() > 1 && s[0] == 'g') digits = s.substr(1);  // "g3" means gamma_3 = gk(2)
  if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
    int v = std::stoi(digits);
    return s.rfind("gk:", 0) == 0 ? gk(v) : gk(v - 1);
  }
  throw Error(ErrorCode::ConfigError, "unknown measure '" + s + "'");
}

std::string MeasureId::name() const {
  switch (kind) {
    case MeasureKind::G01: return "g01";
    case MeasureKind::G02: return "g02";
    case MeasureKind::G1: return "g1";
    case MeasureKind::G21: return "g21";
    case MeasureKind::G22: return "g22";
    case MeasureKind::GK: return "gk:" + std::to_string(k1);
  }
  return "?";
}

int MeasureId::split() const {
  switch (kind) {
    case MeasureKind::G01:
    case MeasureKind::G02:
    case MeasureKind::G1: return 0;
    case MeasureKind::G21:
    case MeasureKind::G22: return 1;
    case MeasureKind::GK: return k1;
  }
  return 0;
}

MeasureId gamma_index(int k) {
  if (k == 1) return MeasureId::g1();
  if (k == 2) return MeasureId::g21();
  return MeasureId::gk(k - 1);
}

Functional parse_functional(const std::string& s) {
  if (s == "xy") return Functional::XY;
  if (s == "yx") return Functional::YX;
  if (s == "nn") return Functional::NN;
  if (s == "cross") return Functional::CROSS;
  if (s == "diag") return Functional::DIAG;
  if (s == "x2yy") return Functional::X2YY;
  if (s == "x2nn") return Functional::X2NN;
  throw Error(ErrorCode::UnsupportedFunctional, "unknown functional '" + s + "'");
}

std::string functional_name(Functional f) {
  switch (f) {
    case Functional::XY: return "xy";
    case Functional::YX: return "yx";
    case Functional::NN: return "nn";
    case Functional::CROSS: return "cross";
    case Functional::DIAG: return "diag";
    case Functional::X2YY: return "x2yy";
    case Functional::X2NN: return "x2nn";
  }
  return "?";
}

Channel channel_for(const MeasureId& ms, Functional f, int r) {
  if (ms.kind == MeasureKind::GK && (ms.k1 < 2 || ms.k1 > r))
    throw Error(ErrorCode::MeasureLevelMismatch, "gk(k1) needs 2 <= k1 <= r, got k1=" + std::to_string(ms.k1));
  auto pairch = [&](int base) -> Channel {
    switch (f) {
      case Functional::XY: return Channel(base + 0);
      case Functional::YX: return Channel(base + 1);
      case Functional::NN: return Channel(base + 2);
      case Functional::CROSS: return Channel(base + 3);
      default: break;
    }
    throw Error(ErrorCode::UnsupportedFunctional, functional_name(f) + " is not a two-replica functional");
  };
  switch (ms.kind) {
    case MeasureKind::G01:
      if (f == Functional::DIAG) return D01;
      break;
    case MeasureKind::G02:
      if (f == Functional::X2YY) return D02A;
      if (f == Functional::X2NN) return D02B;
      break;
    case MeasureKind::G1: return pairch(G1_YY);
    case MeasureKind::G21:
    case MeasureKind::GK: return pairch(P1_YY);
    case MeasureKind::G22: return pairch(P2_YY);
  }
  throw Error(ErrorCode::UnsupportedFunctional, functional_name(f) + " is not defined under " + ms.name());
}

OverlapBank::OverlapBank(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed)
    : cfg_(cfg), t_(t), plan_(plan), seed_(seed), engine_(std::make_unique<Engine>(cfg, t, plan, seed)) {
  cache_.resize(cfg.schedule.r + 1);
}

OverlapBank::~OverlapBank() = default;

const SweepResult& OverlapBank::sweep(int split) const {
  if (split < 0 || split > cfg_.schedule.r)
    throw Error(ErrorCode::MeasureLevelMismatch, "split level outside 0..r");
  auto& slot = cache_[split];
  if (!slot) {
    SweepOptions o;
    o.split = split;
    o.stats = true;
    slot = std::make_unique<SweepResult>(engine_->run(o));
  }
  return *slot;
}

const Vec& OverlapBank::values(const MeasureId& ms, Functional f) const {
  Channel ch = channel_for(ms, f, cfg_.schedule.r);
  return sweep(ms.split()).ch[ch];
}

const Vec& OverlapBank::weights() const {
  for (const auto& c : cache_)
    if (c) return c->weights;
  return sweep(0).weights;
}

const Vec& OverlapBank::psi() const {
  for (const auto& c : cache_)
    if (c) return c->psi;
  return sweep(0).psi;
}

EstimateWithError OverlapBank::estimate(const MeasureId& ms, Functional f) const {
  return summarize_values(values(ms, f));
}

EstimateWithError OverlapBank::summarize_values(const Vec& v) const { return summarize(weights(), v, plan_, seed_); }

EstimateWithError overlap_expectation(const MeasureId& ms, Functional f, const Config& cfg, double t,
                                      const SamplePlan& plan, uint64_t seed) {
  channel_for(ms, f, cfg.schedule.r);
  OverlapBank bank(cfg, t, plan, seed);
  return bank.estimate(ms, f);
}

}  // namespace sfl
