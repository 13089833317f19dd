#pragma once

#include <functional>
#include <vector>

#include "reverso/tensor.hpp"

namespace reverso {

// Central finite-difference verification of analytic gradients.
//
// `loss` evaluates the scalar objective from the current parameter values.
// `backward` must populate p->grad for every parameter (from zeroed grads).
// Returns the max over all parameter entries of
//   |analytic - numeric| / max(1, |numeric|).
double grad_check(const std::vector<ParamRef>& params,
                  const std::function<double()>& loss,
                  const std::function<void()>& backward,
                  double step = 1e-5);

}  // namespace reverso
