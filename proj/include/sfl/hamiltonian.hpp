#pragma once

#include "sfl/model.hpp"
#include "sfl/randomness.hpp"

namespace sfl {

// d0 entry (i1,i2,i3) stored at (i1*l + i2)*l + i3.
struct ExponentTensor {
  int l = 0;
  double t = 0.0;
  Vec d0;
  double at(int i1, int i2, int i3) const { return d0[((size_t)i1 * l + i2) * l + i3]; }
};

// logC entry (i1,i3) stored at i1*l + i3.
struct LogPartitionTensor {
  int l = 0;
  Vec logC;
  Vec logZ;
};

double logsumexp(const double* v, int n);
inline double logsumexp(const Vec& v) { return logsumexp(v.data(), (int)v.size()); }

ExponentTensor exponent_tensor(const EnsembleSpec& spec, const ModelScalars& scalars,
                               const LiftingSchedule& schedule, const Coefficients& coeffs,
                               const GaussianBlock& block, double t);
// Same as exponent_tensor without the sqrt(t)||x|| ||y|| sum_k a_k u4_k term.
ExponentTensor exponent_tensor_S(const EnsembleSpec& spec, const ModelScalars& scalars,
                                 const LiftingSchedule& schedule, const Coefficients& coeffs,
                                 const GaussianBlock& block, double t);

LogPartitionTensor log_partition(const ExponentTensor& tensor, double beta, double s);

}  // namespace sfl
