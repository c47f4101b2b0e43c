#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace gaze2d {

// Central finite-difference validation of the analytic derivatives:
// projection (w.r.t. r, t, g), adapter (w.r.t. delta, bias) and the full
// frozen-label training loss (w.r.t. all 12 scalars). Loss states whose
// smallest residual sits within 1e-6 of an L1/L2 kink are resampled, since
// the finite-difference probe is meaningless across the kink.
struct GradcheckOptions {
  std::uint64_t seed{1};
  int n_states{1000};
  double fd_step{1e-6};
  bool corrupt_jacobian{false};  // test hook: bias analytic values to prove detection
};

struct SuiteResult {
  std::string name;
  int n_states{0};
  double max_scaled_err{0.0};
  double tolerance{0.0};
  bool pass{false};
};

struct GradcheckReport {
  std::vector<SuiteResult> suites;
  bool pass{false};
};

GradcheckReport run_gradcheck(const GradcheckOptions& opts);
void print_gradcheck(const GradcheckReport& report, std::ostream& os);

}  // namespace gaze2d
