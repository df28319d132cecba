#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispref/autodiff/parameter.hpp"

namespace dispref::ad {

inline constexpr std::uint32_t kCheckpointSchemaVersion = 1;

// Binary layout, all integers little-endian:
//   "DRCK" | u32 schema_version | u32 entry_count
//   per entry: u32 name_len | name bytes | u32 rank | rank x u32 dims | numel x f64 (LE)

struct CheckpointEntry {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

struct Checkpoint {
    std::uint32_t schema_version = kCheckpointSchemaVersion;
    std::vector<CheckpointEntry> entries;
};

/// Parameter names or shapes disagree with the model being loaded into.
class CheckpointMismatch : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
/// Throws dispref::IoError on unreadable or malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Copies values into `params`; every parameter must appear exactly once with its shape.
void apply_checkpoint(const Checkpoint& ckpt, ParameterSet& params);

}  // namespace dispref::ad
