#pragma once

#include <cstdint>
#include <vector>

#include "mvn/autodiff.hpp"

namespace mvn::ad {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// AdamW with bias correction and decoupled weight decay. Moment tensors
// mirror the parameter shapes; the step counter is strictly increasing.
class AdamW {
 public:
  explicit AdamW(std::vector<Parameter*> params, AdamWConfig cfg = {});

  // Consumes the gradients currently stored on the parameters.
  void step();
  void zero_grad();

  int64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  AdamWConfig cfg_;
  int64_t step_ = 0;
};

}  // namespace mvn::ad
