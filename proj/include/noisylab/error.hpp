// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace noisylab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the experiment runner; carries the pipeline stage that failed.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& message)
      : Error("stage " + stage_name + ": " + message), stage(std::move(stage_name)) {}
  std::string stage;
};

}  // namespace noisylab
