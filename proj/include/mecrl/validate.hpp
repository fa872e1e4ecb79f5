// SPDX-License-Identifier: Apache-2.0
//
// Self-checks run by `mecrl validate` and the acceptance suite. Each check
// compares the library against an independently coded oracle (naive loops,
// Eigen's own pseudo-inverse, power series, finite differences, closed-form
// stationary statistics).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mecrl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

CheckResult check_cpu_frequency();
CheckResult check_doppler_correlation();
CheckResult check_zf_detector(int trials = 1000, std::uint64_t seed = 11);
CheckResult check_channel_statistics(int slots = 100000, std::uint64_t seed = 12);
CheckResult check_gradients(int coordinates = 100, std::uint64_t seed = 13);
CheckResult check_td3_targets(int batches = 1000, std::uint64_t seed = 14);
CheckResult check_queue_trace(int steps = 10, std::uint64_t seed = 15);
CheckResult check_ou_statistics(int steps = 1000000, std::uint64_t seed = 16);

/// All of the above with their default sizes, in order.
std::vector<CheckResult> run_validation_suite();

}  // namespace mecrl
