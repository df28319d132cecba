#include "dispref/autodiff/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "dispref/core/image_io.hpp"

namespace dispref::ad {
namespace {

constexpr char kMagic[4] = {'D', 'R', 'C', 'K'};

template <typename T>
T to_le(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

template <typename T>
void put(std::ostream& out, T v) {
    v = to_le(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError(path.string() + ": truncated checkpoint");
    return to_le(v);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointSchemaVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor.rank()));
        for (int d : p.tensor.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        for (double v : p.tensor.values()) put<double>(out, v);
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError(path.string() + ": not a checkpoint file");
    Checkpoint ckpt;
    ckpt.schema_version = get<std::uint32_t>(in, path);
    if (ckpt.schema_version != kCheckpointSchemaVersion)
        throw IoError(path.string() + ": unsupported checkpoint schema version " + std::to_string(ckpt.schema_version));
    const auto count = get<std::uint32_t>(in, path);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const auto name_len = get<std::uint32_t>(in, path);
        if (name_len > 4096) throw IoError(path.string() + ": implausible parameter name length");
        e.name.resize(name_len);
        if (!in.read(e.name.data(), name_len)) throw IoError(path.string() + ": truncated checkpoint");
        const auto rank = get<std::uint32_t>(in, path);
        if (rank == 0 || rank > 8) throw IoError(path.string() + ": implausible tensor rank");
        std::size_t n = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            const auto d = get<std::uint32_t>(in, path);
            if (d == 0 || d > (1u << 24)) throw IoError(path.string() + ": implausible tensor extent");
            e.shape.push_back(static_cast<int>(d));
            n *= d;
        }
        e.values.resize(n);
        for (auto& v : e.values) v = get<double>(in, path);
        ckpt.entries.push_back(std::move(e));
    }
    return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, ParameterSet& params) {
    std::unordered_map<std::string, const CheckpointEntry*> by_name;
    for (const auto& e : ckpt.entries)
        if (!by_name.emplace(e.name, &e).second) throw CheckpointMismatch("checkpoint repeats parameter '" + e.name + "'");
    if (by_name.size() != params.size())
        throw CheckpointMismatch("checkpoint has " + std::to_string(by_name.size()) + " parameters, model has " +
                                 std::to_string(params.size()));
    for (const auto& p : params) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) throw CheckpointMismatch("checkpoint lacks parameter '" + p.name + "'");
        if (it->second->shape != p.tensor.shape())
            throw CheckpointMismatch("shape mismatch for '" + p.name + "': checkpoint " + shape_string(it->second->shape) +
                                     ", model " + shape_string(p.tensor.shape()));
    }
    for (auto& p : params) {
        const auto& src = by_name.at(p.name)->values;
        std::copy(src.begin(), src.end(), p.tensor.mutable_values().begin());
    }
}

}  // namespace dispref::ad
