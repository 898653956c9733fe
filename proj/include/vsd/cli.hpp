#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsd/audio.hpp"

namespace vsd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;       // usage / config errors
inline constexpr int kExitData = 3;        // unreadable or unusable data
inline constexpr int kExitDegenerate = 4;  // degenerate training / calibration

// Reproducibility knobs shared by every subcommand; loadable from a JSON
// config file (--config) with flag overrides. The FNV-1a hash of the
// canonical config JSON plus the seed is embedded in every structured output.
struct PipelineConfig {
    double fps = 25.0;
    double blood_threshold = 0.5;
    double grid_step = 0.05;
    std::uint64_t seed = 0;
    int workers = 1;
    long train_samples = 2000;
    long test_samples = 3000;
    double svm_tolerance = 1e-3;
    long svm_max_passes = 1000;
    audio::MfccConfig mfcc;

    std::string canonical_json() const;
    std::string hash() const;  // 16 hex digits
};

PipelineConfig load_config(const std::string& path);

// Entry point used by the vsd binary and by tests; args excludes argv[0].
int run(const std::vector<std::string>& args);

}  // namespace vsd::cli
