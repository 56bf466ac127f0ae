#pragma once

#include <span>
#include <string>
#include <vector>

namespace lffn {

// Named view of one trainable parameter block and its gradient accumulator.
// Modules hand these out in a fixed order; the optimizer and the checkpoint
// container both key on the name.
struct ParamRef {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

}  // namespace lffn
