#include "rsos/sos/sos_norm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rsos/sos/certificate.hpp"

namespace rsos::sos {

double sos_norm(const SymmetricTensor& tensor, int degree, const sdp::Config& config) {
  if (tensor.order() % 2 != 0) throw std::invalid_argument("sos_norm needs an even-order tensor");
  if (degree < tensor.order()) throw std::invalid_argument("sos_norm degree must be at least the tensor order");
  const Polynomial form = tensor.form();
  if (form.is_zero()) return 0.0;
  const SphereMinimum sm = sphere_minimum(form * -1.0, degree, config);
  if (sm.status != sdp::Status::Optimal) {
    throw std::runtime_error(std::string("sos_norm: SDP ended with status ") + sdp::to_string(sm.status));
  }
  return std::pow(std::max(0.0, -sm.value), 1.0 / tensor.order());
}

double sampled_injective_norm(const SymmetricTensor& tensor, int directions, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = 0.0;
  Eigen::VectorXd u(tensor.dimension());
  for (int t = 0; t < directions; ++t) {
    for (int i = 0; i < tensor.dimension(); ++i) u[i] = g(rng);
    u.normalize();
    best = std::max(best, tensor.contract(u));
  }
  return std::pow(best, 1.0 / tensor.order());
}

}  // namespace rsos::sos
