#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gridseer/common/error.hpp"
#include "gridseer/common/fileio.hpp"
#include "gridseer/nn/dense.hpp"
#include "gridseer/nn/lstm.hpp"

namespace gridseer::nn {

enum class ModelKind { FaultType, BusLocator, Congestion, SolarPower, SubsetSurrogate, SvmBaseline };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::FaultType: return "FaultType";
        case ModelKind::BusLocator: return "BusLocator";
        case ModelKind::Congestion: return "Congestion";
        case ModelKind::SolarPower: return "SolarPower";
        case ModelKind::SubsetSurrogate: return "SubsetSurrogate";
        case ModelKind::SvmBaseline: return "SvmBaseline";
    }
    return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
    for (auto k : {ModelKind::FaultType, ModelKind::BusLocator, ModelKind::Congestion, ModelKind::SolarPower,
                   ModelKind::SubsetSurrogate, ModelKind::SvmBaseline})
        if (to_string(k) == s) return k;
    throw ParseError("unknown model kind " + std::string(s));
}

/// A named free-standing vector (feature standardization constants etc.).
struct WeightVector {
    std::string name;
    Vector values;
    bool operator==(const WeightVector& o) const { return name == o.name && values == o.values; }
};

using Layer = std::variant<LstmParams, DenseParams, WeightVector>;

/// Versioned container for every trainable network in the toolkit.
struct ModelParams {
    ModelKind kind = ModelKind::FaultType;
    std::vector<Layer> layers;
    nlohmann::json metadata = nlohmann::json::object();

    bool operator==(const ModelParams& o) const {
        return kind == o.kind && layers == o.layers && metadata == o.metadata;
    }

    template <typename T>
    const T& layer(std::size_t i) const {
        if (i >= layers.size() || !std::holds_alternative<T>(layers[i]))
            throw ShapeMismatch(std::string(to_string(kind)) + " model layer " + std::to_string(i) +
                                " has an unexpected type");
        return std::get<T>(layers[i]);
    }
};

// ---- checkpoint ----------------------------------------------------------
//
// Layout: 8-byte magic "GSNN0001", uint64 LE header length, JSON header,
// then the float64 LE payload. Header offsets are byte offsets into the
// payload; matrices are stored row-major.

inline constexpr std::string_view kCheckpointMagic = "GSNN0001";

namespace detail {

inline void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t read_u64(std::string_view in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
    return v;
}

inline void append_f64(std::string& out, double d) { append_u64(out, std::bit_cast<std::uint64_t>(d)); }

struct BlobWriter {
    std::string payload;
    nlohmann::json put(const Tensor2& m) {
        nlohmann::json j{{"offset", payload.size()}, {"rows", m.rows()}, {"cols", m.cols()}};
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) append_f64(payload, m(r, c));
        return j;
    }
    nlohmann::json put(const Vector& v) {
        nlohmann::json j{{"offset", payload.size()}, {"rows", v.size()}, {"cols", 1}};
        for (Eigen::Index i = 0; i < v.size(); ++i) append_f64(payload, v(i));
        return j;
    }
};

struct BlobReader {
    std::string_view payload;
    Tensor2 matrix(const nlohmann::json& j) const {
        const auto off = j.at("offset").get<std::size_t>();
        const auto rows = j.at("rows").get<Eigen::Index>();
        const auto cols = j.at("cols").get<Eigen::Index>();
        const std::size_t bytes = static_cast<std::size_t>(rows * cols) * 8;
        if (off + bytes > payload.size()) throw ParseError("checkpoint payload truncated");
        Tensor2 m(rows, cols);
        std::size_t p = off;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c, p += 8)
                m(r, c) = std::bit_cast<double>(read_u64(payload.substr(p, 8)));
        return m;
    }
    Vector vector(const nlohmann::json& j) const {
        Tensor2 m = matrix(j);
        if (m.cols() != 1) throw ParseError("checkpoint vector has more than one column");
        return m.col(0);
    }
};

}  // namespace detail

inline std::string serialize_checkpoint(const ModelParams& m) {
    detail::BlobWriter w;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : m.layers) {
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, LstmParams>) {
                    layers.push_back({{"type", "lstm"},
                                      {"input_dim", l.input_dim},
                                      {"hidden_dim", l.hidden_dim},
                                      {"weights", w.put(l.weights)},
                                      {"bias", w.put(l.bias)}});
                } else if constexpr (std::is_same_v<T, DenseParams>) {
                    layers.push_back({{"type", "dense"},
                                      {"activation", std::string(to_string(l.activation))},
                                      {"weights", w.put(l.weights)},
                                      {"bias", w.put(l.bias)}});
                } else {
                    layers.push_back({{"type", "vector"}, {"name", l.name}, {"values", w.put(l.values)}});
                }
            },
            layer);
    }
    const nlohmann::json header{{"format_version", 1},
                                {"kind", std::string(to_string(m.kind))},
                                {"metadata", m.metadata},
                                {"layers", layers},
                                {"payload_bytes", w.payload.size()}};
    const std::string hs = header.dump();
    std::string out(kCheckpointMagic);
    detail::append_u64(out, hs.size());
    out += hs;
    out += w.payload;
    return out;
}

inline ModelParams parse_checkpoint(std::string_view bytes) {
    if (bytes.size() < 16 || bytes.substr(0, 8) != kCheckpointMagic)
        throw ParseError("not a GSNN0001 checkpoint");
    const std::uint64_t hlen = detail::read_u64(bytes.substr(8, 8));
    if (16 + hlen > bytes.size()) throw ParseError("checkpoint header truncated");
    ModelParams m;
    try {
        const auto header = nlohmann::json::parse(bytes.substr(16, hlen));
        if (header.at("format_version").get<int>() != 1) throw ParseError("unsupported checkpoint version");
        const detail::BlobReader r{bytes.substr(16 + hlen)};
        if (r.payload.size() != header.at("payload_bytes").get<std::size_t>())
            throw ParseError("checkpoint payload size mismatch");
        m.kind = parse_model_kind(header.at("kind").get<std::string>());
        m.metadata = header.at("metadata");
        for (const auto& jl : header.at("layers")) {
            const auto type = jl.at("type").get<std::string>();
            if (type == "lstm") {
                LstmParams p;
                p.input_dim = jl.at("input_dim").get<std::size_t>();
                p.hidden_dim = jl.at("hidden_dim").get<std::size_t>();
                p.weights = r.matrix(jl.at("weights"));
                p.bias = r.vector(jl.at("bias"));
                p.check();
                m.layers.emplace_back(std::move(p));
            } else if (type == "dense") {
                DenseParams p;
                p.activation = parse_activation(jl.at("activation").get<std::string>());
                p.weights = r.matrix(jl.at("weights"));
                p.bias = r.vector(jl.at("bias"));
                if (p.bias.size() != p.weights.rows()) throw ParseError("dense layer bias/weight mismatch");
                m.layers.emplace_back(std::move(p));
            } else if (type == "vector") {
                m.layers.emplace_back(WeightVector{jl.at("name").get<std::string>(), r.vector(jl.at("values"))});
            } else {
                throw ParseError("unknown layer type " + type);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint header: ") + e.what());
    } catch (const ShapeMismatch& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    return m;
}

inline void save_checkpoint(const ModelParams& m, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_checkpoint(m));
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace gridseer::nn
