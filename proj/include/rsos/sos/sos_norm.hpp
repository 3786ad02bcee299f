#pragma once

#include "rsos/poly/symmetric_tensor.hpp"
#include "rsos/sdp/solver.hpp"

namespace rsos::sos {

/// (max over degree-`degree` pseudo-distributions on the unit sphere of E<T, u^{(x)2t}>)^{1/2t},
/// clamped at zero. Throws std::runtime_error if the SDP does not reach optimality.
double sos_norm(const SymmetricTensor& tensor, int degree, const sdp::Config& config = {});

/// max over the given unit directions of <T, u^{(x)r}>^{1/r} (clamped at zero).
double sampled_injective_norm(const SymmetricTensor& tensor, int directions, unsigned long long seed);

}  // namespace rsos::sos
