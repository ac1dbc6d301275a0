#include "mvn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mvn/rng.hpp"

namespace mvn::ad {

double grad_check(const std::function<double(bool)>& loss, const std::vector<Parameter*>& params,
                  const GradCheckOptions& opts) {
  for (Parameter* p : params) p->zero_grad();
  loss(true);
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  double max_rel = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const Index n = p.value.size();
    std::vector<Index> coords;
    if (n <= opts.max_coords_per_param) {
      coords.resize(static_cast<size_t>(n));
      for (Index i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    } else {
      Pcg32 rng(opts.seed, static_cast<uint64_t>(pi) * 2 + 1);
      for (int i = 0; i < opts.max_coords_per_param; ++i) {
        coords.push_back(static_cast<Index>(rng.next_u32() % static_cast<uint32_t>(n)));
      }
    }
    double* data = p.value.data();
    const double* ga = analytic[pi].data();
    for (const Index c : coords) {
      const double saved = data[c];
      data[c] = saved + opts.h;
      const double fp = loss(false);
      data[c] = saved - opts.h;
      const double fm = loss(false);
      data[c] = saved;
      const double cd = (fp - fm) / (2.0 * opts.h);
      const double a = ga[c];
      const double rel = std::abs(a - cd) / std::max({std::abs(a), std::abs(cd), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace mvn::ad
