#include "tariffsim/error.hpp"

namespace tariffsim {

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kValidation:
      return 2;
    case ErrorCategory::kIo:
      return 3;
    case ErrorCategory::kInfeasible:
      return 4;
    case ErrorCategory::kConvergence:
      return 5;
    case ErrorCategory::kNumerical:
      return 6;
  }
  return 1;
}

}  // namespace tariffsim
