#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispref/blackbox/pipeline.hpp"
#include "dispref/eval/pointcloud.hpp"
#include "dispref/net/config.hpp"
#include "dispref/train/trainer.hpp"

namespace dispref {

/// Bad configuration value or unknown key.
class ConfigError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Everything a run can be configured with. Files use INI syntax:
///
///   [blackbox]
///   mode = sgm
///   d_max = 32
///
/// Every key is addressed as "section.key" and may also be given on the
/// command line as --section.key=value.
struct RunConfig {
    // [blackbox]; penalties and path count default to the mode's preset.
    CostMode mode = CostMode::census;
    int d_max = 32;
    std::optional<double> p1, p2;
    std::optional<int> paths;
    int census_window = 5;
    bool lr_check = true;
    double lr_threshold = 1.0;

    NetConfig net;      // [net]
    TrainConfig train;  // [train]
    std::uint64_t seed = 1;  // [run]
    CameraModel camera{1.0, 1.0, -1.0, -1.0};  // [camera]; cx, cy < 0 mean image center
    bool camera_center_auto = true;

    // [synth]
    int synth_width = 64;
    int synth_height = 64;
    double synth_d_max = 15.0;
    int synth_kappa = 1;

    /// Preset for `mode` with the explicit overrides applied.
    BlackboxConfig blackbox() const;

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;

    /// Parses INI text; later assignments win. Throws ConfigError.
    void merge_ini(const std::string& text);
    void merge_file(const std::filesystem::path& path);

    /// Complete effective configuration in INI form.
    std::string to_ini() const;

    struct Key {
        std::string name;  // "section.key"
        std::string help;
    };
    static const std::vector<Key>& keys();
};

}  // namespace dispref
