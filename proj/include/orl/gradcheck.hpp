#pragma once

// Central finite-difference verification of the analytic gradients, plus a
// battery of named checks covering every scoring head and the composite
// training loss.

#include <functional>
#include <string>
#include <vector>

#include "orl/params.hpp"

namespace orl::nn {

struct GradCheckOptions {
  double step = 1e-5;  // central difference half-step
  // test hook: added to the first analytic gradient entry of the first
  // parameter so negative controls can prove the check would catch a bug
  double corrupt = 0.0;
};

// build must construct a deterministic scalar loss from the current
// parameter values on the given tape. Returns the max relative error,
// |analytic - numeric| / max(1, |analytic|, |numeric|).
double grad_check(const std::function<Expr(Tape&)>& build,
                  const std::vector<Param*>& params,
                  const GradCheckOptions& opts = {},
                  std::string* worst_param = nullptr);

struct HeadCheck {
  std::string name;
  double max_rel_err = 0;
};

// one entry per scoring head plus the full composite loss, vanilla and
// syntax-enhanced; `only` (when non-empty) restricts to the named heads
std::vector<HeadCheck> gradcheck_heads(uint64_t seed,
                                       const GradCheckOptions& opts = {},
                                       const std::vector<std::string>& only = {});

}  // namespace orl::nn
