#pragma once

#include <filesystem>

#include "upplane/numstats.hpp"

namespace upplane::sample_io {

// Binary tensor format: float32 row-major (n rows by d columns), with a JSON
// sidecar at <path>.json holding {"n": ..., "d": ..., "dtype": "f32"}.
void save_samples_f32(const std::filesystem::path& path,
                      const numstats::SampleSet& s);
numstats::SampleSet load_samples_f32(const std::filesystem::path& path);

// CSV, one sample per row.
void save_samples_csv(const std::filesystem::path& path,
                      const numstats::SampleSet& s);
numstats::SampleSet load_samples_csv(const std::filesystem::path& path);

// Dispatches on extension: ".csv" reads CSV, anything else the binary format.
numstats::SampleSet load_samples(const std::filesystem::path& path);

}  // namespace upplane::sample_io
