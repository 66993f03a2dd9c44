#pragma once

#include <cstdint>
#include <string>

#include "apml/classifier.hpp"
#include "apml/generators.hpp"

namespace apml {

struct SweepReport {
  uint64_t total_vulnerabilities = 0;
  double per_sample_mean = 0.0;
  double pct_pixels = 0.0;  // vulnerabilities / (samples * pixels)
  uint64_t samples = 0;
  uint64_t pixels_per_sample = 0;
  std::string checksum_before, checksum_after;  // dataset bit audit
};

// Flips every pixel of every sample in turn (restoring afterwards) and
// counts flips that change the model's assigned class relative to its
// prediction on the clean sample.
SweepReport one_pixel_sweep(const CentroidModel& model, const DistanceContext& ctx,
                            const LabelledDataset& ds);

}  // namespace apml
