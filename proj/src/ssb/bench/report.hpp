#pragma once

#include <string>

#include "ssb/bench/experiment.hpp"

namespace ssb::bench {

// Standalone SVG figures rendered from a finished report:
//   detection.svg  - missed-detection probability per entry vs the energy
//                    detector baseline (log scale)
//   ops.svg        - inference op counts (log scale)
//   memory.svg     - peak and total memory footprints
// All output is deterministic: same report, same bytes.
std::string render_detection_svg(const ExperimentReport& rep);
std::string render_ops_svg(const ExperimentReport& rep);
std::string render_memory_svg(const ExperimentReport& rep);

// Writes the three figures into out_dir.
void render_figures(const ExperimentReport& rep, const std::string& out_dir);

}  // namespace ssb::bench
