#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "revsent/tensor.hpp"

namespace revsent {

// Checkpoints are a pair of files sharing a base path:
//   <base>.manifest  text: `meta <key> <value>` lines, then one
//                    `param <name> <d0>[,<d1>...]` line per tensor in order
//   <base>.bin       concatenated little-endian float32 payloads in the
//                    same order
struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::pair<std::string, Tensor>> params;

    void add_meta(const std::string& key, const std::string& value) { meta.emplace_back(key, value); }

    std::string meta_value(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        throw RevsentError("checkpoint: missing meta key `" + key + "`");
    }

    bool has_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return true;
        return false;
    }

    const Tensor& param(const std::string& name) const {
        for (const auto& [n, t] : params)
            if (n == name) return t;
        throw RevsentError("checkpoint: missing parameter `" + name + "`");
    }
};

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& base) {
    std::ofstream mf(base + ".manifest");
    if (!mf) throw RevsentError("cannot write " + base + ".manifest");
    for (const auto& [k, v] : ckpt.meta) mf << "meta " << k << ' ' << v << '\n';
    for (const auto& [name, t] : ckpt.params) {
        mf << "param " << name << ' ';
        const auto& s = t.shape();
        for (std::size_t i = 0; i < s.size(); ++i) mf << (i ? "," : "") << s[i];
        mf << '\n';
    }
    std::ofstream bf(base + ".bin", std::ios::binary);
    if (!bf) throw RevsentError("cannot write " + base + ".bin");
    for (const auto& [name, t] : ckpt.params) {
        for (real v : t.data()) {
            float f = float(v);
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                                  static_cast<unsigned char>((u >> 8) & 0xff),
                                  static_cast<unsigned char>((u >> 16) & 0xff),
                                  static_cast<unsigned char>((u >> 24) & 0xff)};
            bf.write(reinterpret_cast<const char*>(b), 4);
        }
    }
}

inline Checkpoint load_checkpoint(const std::string& base) {
    std::ifstream mf(base + ".manifest");
    if (!mf) throw RevsentError("cannot read " + base + ".manifest");
    Checkpoint ckpt;
    std::vector<std::pair<std::string, Shape>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(mf, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string kind;
        is >> kind;
        if (kind == "meta") {
            std::string key;
            is >> key;
            std::string value;
            std::getline(is, value);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            ckpt.meta.emplace_back(key, value);
        } else if (kind == "param") {
            std::string name, dims;
            is >> name >> dims;
            Shape shape;
            std::size_t pos = 0;
            while (pos < dims.size()) {
                std::size_t comma = dims.find(',', pos);
                if (comma == std::string::npos) comma = dims.size();
                shape.push_back(std::stoi(dims.substr(pos, comma - pos)));
                pos = comma + 1;
            }
            entries.emplace_back(name, shape);
        } else {
            throw ParseError(base + ".manifest:" + std::to_string(lineno) + ": unknown entry `" + kind + "`");
        }
    }
    std::ifstream bf(base + ".bin", std::ios::binary);
    if (!bf) throw RevsentError("cannot read " + base + ".bin");
    for (auto& [name, shape] : entries) {
        std::vector<real> values(numel(shape));
        for (auto& v : values) {
            unsigned char b[4];
            if (!bf.read(reinterpret_cast<char*>(b), 4))
                throw ParseError(base + ".bin: truncated payload for parameter `" + name + "`");
            std::uint32_t u = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                              (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
            float f;
            std::memcpy(&f, &u, 4);
            v = real(f);
        }
        ckpt.params.emplace_back(name, Tensor::from(std::move(values), shape, true));
    }
    return ckpt;
}

}  // namespace revsent
