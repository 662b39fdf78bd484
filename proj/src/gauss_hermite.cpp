#include "sfl/gauss_hermite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>

namespace sfl {

const GaussHermite& gauss_hermite(int count) {
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(count);
  if (it != cache.end()) return it->second;
  if (count < 1) throw Error(ErrorCode::IndexOutOfRange, "Gauss-Hermite node count must be positive");

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(count, count);
  for (int k = 1; k < count; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt((double)k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermite gh;
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    gh.nodes.push_back(es.eigenvalues()(i));
    double v = es.eigenvectors()(0, i);
    gh.weights.push_back(v * v);
    total += v * v;
  }
  for (double& w : gh.weights) w /= total;
  // Symmetrize so odd moments vanish to rounding.
  for (int i = 0; i < count / 2; ++i) {
    int j = count - 1 - i;
    double x = 0.5 * (gh.nodes[j] - gh.nodes[i]);
    double w = 0.5 * (gh.weights[i] + gh.weights[j]);
    gh.nodes[i] = -x;
    gh.nodes[j] = x;
    gh.weights[i] = gh.weights[j] = w;
  }
  if (count % 2 == 1) gh.nodes[count / 2] = 0.0;
  return cache.emplace(count, std::move(gh)).first->second;
}

}  // namespace sfl
