#include "dispref/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "dispref/core/image_io.hpp"

namespace dispref {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': cannot parse '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("'" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<int> parse_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
    if (out.empty()) throw ConfigError("'" + key + "': empty list");
    return out;
}

std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, end);
}

std::string fmt(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

struct Binding {
    std::string help;
    std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define DISPREF_NUM(NAME, FIELD, TYPE, HELP)                                                                    \
    {NAME,                                                                                                     \
     {HELP, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse_number<TYPE>(k, v); }, \
      [](const RunConfig& c) { return fmt(static_cast<double>(c.FIELD)); }}}

#define DISPREF_INT(NAME, FIELD, TYPE, HELP)                                                                    \
    {NAME,                                                                                                     \
     {HELP, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse_number<TYPE>(k, v); }, \
      [](const RunConfig& c) { return std::to_string(c.FIELD); }}}

#define DISPREF_PATH(NAME, FIELD, HELP)                                                                    \
    {NAME,                                                                                                \
     {HELP, [](RunConfig& c, const std::string&, const std::string& v) { c.FIELD = v; },                  \
      [](const RunConfig& c) { return c.FIELD.string(); }}}

const std::map<std::string, Binding>& bindings() {
    static const std::map<std::string, Binding> table = {
        {"blackbox.mode",
         {"matching cost: sgm (census) or ad_census",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "sgm" || v == "census") c.mode = CostMode::census;
              else if (v == "ad_census" || v == "adcensus") c.mode = CostMode::ad_census;
              else throw ConfigError("'" + k + "': unknown mode '" + v + "'");
          },
          [](const RunConfig& c) { return std::string(c.mode == CostMode::census ? "sgm" : "ad_census"); }}},
        DISPREF_INT("blackbox.d_max", d_max, int, "disparity search range in left pixels"),
        {"blackbox.p1",
         {"small smoothness penalty (default: mode preset)",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.p1 = parse_number<double>(k, v); },
          [](const RunConfig& c) { return fmt(c.blackbox().sgm.p1); }}},
        {"blackbox.p2",
         {"large smoothness penalty (default: mode preset)",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.p2 = parse_number<double>(k, v); },
          [](const RunConfig& c) { return fmt(c.blackbox().sgm.p2); }}},
        {"blackbox.paths",
         {"aggregation paths, 4 or 8 (default: mode preset)",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.paths = parse_number<int>(k, v); },
          [](const RunConfig& c) { return std::to_string(c.blackbox().sgm.num_paths); }}},
        DISPREF_INT("blackbox.census_window", census_window, int, "census window size (odd, 3..7)"),
        {"blackbox.lr_check",
         {"left-right consistency check",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_check = parse_bool(k, v); },
          [](const RunConfig& c) { return std::string(c.lr_check ? "true" : "false"); }}},
        DISPREF_NUM("blackbox.lr_threshold", lr_threshold, double, "left-right tolerance in pixels"),

        DISPREF_INT("net.levels", net.levels, int, "encoder/decoder levels"),
        {"net.channels",
         {"comma-separated channel width per level",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.net.channels = parse_list(k, v); },
          [](const RunConfig& c) { return fmt(c.net.channels); }}},
        DISPREF_INT("net.max_disp", net.max_disp, int, "largest representable disparity (bins = max_disp + 1)"),
        {"net.mlp_hidden",
         {"comma-separated hidden widths of the point-wise MLPs",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.net.mlp_hidden = parse_list(k, v); },
          [](const RunConfig& c) { return fmt(c.net.mlp_hidden); }}},
        DISPREF_INT("net.image_channels", net.image_channels, int, "1 (gray) or 3 (RGB)"),
        {"net.head",
         {"classify_offset or l1_regression",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              try {
                  c.net.head = head_from_string(v);
              } catch (const std::domain_error&) {
                  throw ConfigError("'" + k + "': unknown head '" + v + "'");
              }
          },
          [](const RunConfig& c) { return std::string(to_string(c.net.head)); }}},

        DISPREF_INT("train.steps", train.steps, long, "optimizer steps"),
        DISPREF_INT("train.crop", train.crop, int, "square crop size of synthetic scenes"),
        DISPREF_NUM("train.scene_d_max", train.scene_d_max, double, "largest scene disparity before scaling"),
        DISPREF_INT("train.blackbox_d_max", train.blackbox_d_max, int, "matcher search range during training"),
        DISPREF_INT("train.coords_per_crop", train.coords_per_crop, int, "query points per step"),
        DISPREF_NUM("train.lr", train.lr, double, "Adam learning rate"),
        DISPREF_NUM("train.lr_decay_at", train.lr_decay_at, double, "fraction of steps after which lr halves"),
        DISPREF_NUM("train.sigma", train.sigma, double, "std-dev of the classification target (bins)"),
        DISPREF_NUM("train.scale_min", train.scale_min, double, "lower disparity scaling factor"),
        DISPREF_NUM("train.scale_max", train.scale_max, double, "upper disparity scaling factor"),
        DISPREF_NUM("train.unbalanced_probability", train.unbalanced_probability, double,
                    "share of half-resolution right views"),
        DISPREF_INT("train.val_every", train.val_every, long, "validation interval in steps (0: off)"),
        DISPREF_INT("train.val_scenes", train.val_scenes, int, "held-out validation scenes"),
        DISPREF_INT("train.checkpoint_every", train.checkpoint_every, long, "checkpoint interval (0: final only)"),
        DISPREF_PATH("train.log_csv", train.log_csv, "metrics CSV path (empty: none)"),

        DISPREF_INT("run.seed", seed, std::uint64_t, "seed for weights, scenes and sampling"),

        DISPREF_NUM("camera.focal", camera.focal, double, "focal length in pixels"),
        DISPREF_NUM("camera.baseline", camera.baseline, double, "baseline in meters"),
        {"camera.cx",
         {"principal point x (negative: image center)",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.camera.cx = parse_number<double>(k, v);
              c.camera_center_auto = c.camera.cx < 0.0 || c.camera.cy < 0.0;
          },
          [](const RunConfig& c) { return c.camera_center_auto ? std::string("-1") : fmt(c.camera.cx); }}},
        {"camera.cy",
         {"principal point y (negative: image center)",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.camera.cy = parse_number<double>(k, v);
              c.camera_center_auto = c.camera.cx < 0.0 || c.camera.cy < 0.0;
          },
          [](const RunConfig& c) { return c.camera_center_auto ? std::string("-1") : fmt(c.camera.cy); }}},

        DISPREF_INT("synth.width", synth_width, int, "scene width"),
        DISPREF_INT("synth.height", synth_height, int, "scene height"),
        DISPREF_NUM("synth.d_max", synth_d_max, double, "largest scene disparity"),
        DISPREF_INT("synth.kappa", synth_kappa, int, "right view downsampling factor"),
    };
    return table;
}

#undef DISPREF_NUM
#undef DISPREF_INT
#undef DISPREF_PATH

}  // namespace

BlackboxConfig RunConfig::blackbox() const {
    BlackboxConfig c = mode == CostMode::census ? BlackboxConfig::sgm_census(d_max) : BlackboxConfig::ad_census(d_max);
    if (p1) c.sgm.p1 = *p1;
    if (p2) c.sgm.p2 = *p2;
    if (paths) c.sgm.num_paths = *paths;
    c.cost.census_window = census_window;
    c.sgm.lr_check = lr_check;
    c.sgm.lr_threshold = lr_threshold;
    return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto it = bindings().find(key);
    if (it == bindings().end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second.set(*this, key, trim(value));
}

std::string RunConfig::get(const std::string& key) const {
    const auto it = bindings().find(key);
    if (it == bindings().end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second.get(*this);
}

void RunConfig::merge_ini(const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
        set(section + "." + key, line.substr(eq + 1));
    }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    merge_ini(ss.str());
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    std::string section;
    for (const auto& [name, b] : bindings()) {
        const auto dot = name.find('.');
        const std::string sec = name.substr(0, dot);
        if (sec != section) {
            out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        out << name.substr(dot + 1) << " = " << b.get(*this) << '\n';
    }
    return out.str();
}

const std::vector<RunConfig::Key>& RunConfig::keys() {
    static const std::vector<Key> list = [] {
        std::vector<Key> k;
        for (const auto& [name, b] : bindings()) k.push_back({name, b.help});
        return k;
    }();
    return list;
}

}  // namespace dispref
