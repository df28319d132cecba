#include "dispref/net/config.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dispref/core/image_io.hpp"

namespace dispref {
namespace {

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::vector<int> split_ints(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw std::domain_error("model card: bad integer list '" + text + "'");
        }
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

const char* to_string(HeadKind head) {
    return head == HeadKind::classify_offset ? "classify_offset" : "l1_regression";
}

HeadKind head_from_string(const std::string& text) {
    if (text == "classify_offset") return HeadKind::classify_offset;
    if (text == "l1_regression" || text == "l1") return HeadKind::l1_regression;
    throw std::domain_error("unknown head kind '" + text + "'");
}

int NetConfig::feature_dim() const { return std::accumulate(channels.begin(), channels.end(), 0); }

void NetConfig::validate() const {
    if (levels < 2) throw std::domain_error("NetConfig: levels must be >= 2");
    if (static_cast<int>(channels.size()) != levels)
        throw std::domain_error("NetConfig: channels list length must equal levels");
    for (int c : channels)
        if (c < 1) throw std::domain_error("NetConfig: channel widths must be positive");
    if (d_bins() < 2) throw std::domain_error("NetConfig: need at least two disparity bins");
    if (d_bins() > kMaxBins) throw std::domain_error("NetConfig: at most " + std::to_string(kMaxBins) + " disparity bins");
    if (mlp_hidden.empty()) throw std::domain_error("NetConfig: MLP needs at least one hidden layer");
    for (int h : mlp_hidden)
        if (h < 1) throw std::domain_error("NetConfig: MLP widths must be positive");
    if (image_channels != 1 && image_channels != 3) throw std::domain_error("NetConfig: image_channels must be 1 or 3");
}

NetConfig NetConfig::desk_scale() { return {}; }

NetConfig NetConfig::full_scale() {
    NetConfig c;
    c.levels = 5;
    c.channels = {64, 128, 256, 512, 512};
    c.max_disp = 256;
    c.mlp_hidden = {1024, 512, 256, 128};
    c.image_channels = 3;
    return c;
}

std::string NetConfig::to_card() const {
    std::ostringstream out;
    out << "levels = " << levels << '\n'
        << "channels = " << join(channels) << '\n'
        << "max_disp = " << max_disp << '\n'
        << "mlp_hidden = " << join(mlp_hidden) << '\n'
        << "image_channels = " << image_channels << '\n'
        << "head = " << to_string(head) << '\n';
    return out.str();
}

NetConfig NetConfig::from_card(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::domain_error("model card: malformed line '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    NetConfig c;
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::domain_error(std::string("model card: missing key '") + key + "'");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    try {
        c.levels = std::stoi(take("levels"));
        c.channels = split_ints(take("channels"));
        c.max_disp = std::stoi(take("max_disp"));
        c.mlp_hidden = split_ints(take("mlp_hidden"));
        c.image_channels = std::stoi(take("image_channels"));
    } catch (const std::invalid_argument&) {
        throw std::domain_error("model card: non-numeric value");
    }
    c.head = head_from_string(take("head"));
    if (!kv.empty()) throw std::domain_error("model card: unknown key '" + kv.begin()->first + "'");
    c.validate();
    return c;
}

void write_model_card(const std::filesystem::path& path, const NetConfig& config) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# refinement network configuration\n" << config.to_card();
}

NetConfig read_model_card(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model card " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return NetConfig::from_card(ss.str());
}

std::filesystem::path model_card_path(const std::filesystem::path& checkpoint) {
    return std::filesystem::path(checkpoint.string() + ".card");
}

}  // namespace dispref
