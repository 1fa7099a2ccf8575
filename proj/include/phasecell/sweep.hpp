#pragma once

#include <string>
#include <vector>

#include "phasecell/detector.hpp"

namespace phasecell {

/// One calibration observation: generator phase and the raw branch voltages.
struct SweepRecord {
    double phase_deg = 0.0;
    double vdi_v = 0.0;
    double vdq_v = 0.0;
};

/// Simulate a full-circle calibration sweep at phases 0, step, ..., < 360.
/// Deterministic under a seed (per-record noise streams are derived from it).
std::vector<SweepRecord> simulate_sweep(const DetectorParams& params, double step_deg,
                                        std::optional<std::uint64_t> rng_seed = std::nullopt);

/// CSV with header "phase_deg,vdi_v,vdq_v", one record per line.
std::string sweep_to_csv(const std::vector<SweepRecord>& records);

/// Parse sweep CSV; malformed input reports the offending line number.
std::vector<SweepRecord> sweep_from_csv(const std::string& text);

}  // namespace phasecell
