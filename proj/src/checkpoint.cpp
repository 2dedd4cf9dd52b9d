#include "eqn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "eqn/error.hpp"

namespace eqn {

namespace {

constexpr std::array<char, 8> kMagic = {'E', 'Q', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

void put_doubles(std::string& out, std::span<const double> values) {
    for (double d : values) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

class Reader {
public:
    Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

    std::string_view bytes(std::size_t n) {
        if (n > data_.size() - pos_) throw DataError(path_ + ": truncated checkpoint");
        std::string_view out(data_.data() + pos_, n);
        pos_ += n;
        return out;
    }

    std::uint64_t u64(int width = 8) {
        auto raw = bytes(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
        }
        return v;
    }

    void doubles(std::span<double> out) {
        for (double& d : out) d = std::bit_cast<double>(u64());
    }

    bool done() const { return pos_ == data_.size(); }

private:
    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json header;
    header["backend"] = to_string(backend_of(ckpt.model));
    header["labels"] = label_count(ckpt.model);
    header["dim"] = input_dim(ckpt.model);
    header["featurizer"] = ckpt.featurizer;
    header["featurizer_fingerprint"] = fingerprint(ckpt.featurizer);
    header["config_fingerprint"] = ckpt.config_fingerprint;
    header["seed"] = ckpt.seed;
    header["idf_size"] = ckpt.idf.values.size();
    if (const auto* lin = std::get_if<LinearModel>(&ckpt.model)) {
        header["l2"] = lin->l2;
    } else {
        header["hidden"] = std::get<MlpModel>(ckpt.model).hidden;
    }
    std::string header_text = header.dump();

    std::string out(kMagic.begin(), kMagic.end());
    put_u32(out, kVersion);
    put_u64(out, header_text.size());
    out += header_text;
    put_doubles(out, ckpt.idf.values);
    Model copy = ckpt.model;
    for (auto block : std::visit([](auto& m) { return parameter_blocks(m); }, copy)) {
        put_doubles(out, block);
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("cannot write checkpoint: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path, const FeaturizerConfig* expected_featurizer) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open checkpoint: " + path);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    Reader in(buffer.str(), path);

    auto magic = in.bytes(kMagic.size());
    if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) {
        throw DataError(path + ": not an eqn checkpoint");
    }
    auto version = static_cast<std::uint32_t>(in.u64(4));
    if (version != kVersion) {
        throw DataError(fmt::format("{}: unsupported checkpoint version {}", path, version));
    }
    auto header_len = in.u64();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(in.bytes(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("{}: corrupt checkpoint header: {}", path, e.what()));
    }

    Checkpoint ckpt;
    ckpt.featurizer = header.at("featurizer").get<FeaturizerConfig>();
    const auto stored_fp = header.at("featurizer_fingerprint").get<std::string>();
    if (stored_fp != fingerprint(ckpt.featurizer)) {
        throw DataError(path + ": featurizer fingerprint does not match stored featurizer config");
    }
    if (expected_featurizer != nullptr && fingerprint(*expected_featurizer) != stored_fp) {
        throw ConfigError(fmt::format(
            "{}: featurizer fingerprint mismatch (checkpoint {}, configuration {})", path, stored_fp,
            fingerprint(*expected_featurizer)));
    }
    ckpt.config_fingerprint = header.at("config_fingerprint").get<std::string>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();

    const auto labels = header.at("labels").get<std::size_t>();
    const auto dim = header.at("dim").get<std::size_t>();
    ckpt.idf.values.resize(header.at("idf_size").get<std::size_t>());
    in.doubles(ckpt.idf.values);

    const auto backend = parse_backend(header.at("backend").get<std::string>());
    if (backend == Backend::linear) {
        ckpt.model = LinearModel::zeros(dim, labels, header.at("l2").get<double>());
    } else {
        MlpModel m;
        m.labels = labels;
        m.dim = dim;
        m.hidden = header.at("hidden").get<std::size_t>();
        m.hidden_weights.resize(m.hidden * dim);
        m.hidden_bias.resize(m.hidden);
        m.output_weights.resize(labels * m.hidden);
        m.output_bias.resize(labels);
        ckpt.model = std::move(m);
    }
    for (auto block : std::visit([](auto& m) { return parameter_blocks(m); }, ckpt.model)) {
        in.doubles(block);
    }
    if (!in.done()) throw DataError(path + ": trailing bytes after checkpoint payload");
    return ckpt;
}

}  // namespace eqn
