#pragma once

#include <functional>
#include <vector>

#include "mvn/autodiff.hpp"

namespace mvn::ad {

struct GradCheckOptions {
  double h = 1e-5;
  int max_coords_per_param = 40;  // sampled when a parameter is larger
  uint64_t seed = 0;
};

// Central-difference gradient check. `loss(true)` must run a fresh forward
// pass and leave analytic gradients on the parameters; `loss(false)` must run
// the forward pass only. Returns the max over sampled coordinates of
// |analytic - cd| / max(|analytic|, |cd|, 1e-8).
double grad_check(const std::function<double(bool compute_grad)>& loss,
                  const std::vector<Parameter*>& params, const GradCheckOptions& opts = {});

}  // namespace mvn::ad
