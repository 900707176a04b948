#include "sevlm/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace sevlm {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using nlohmann::json;

namespace {

constexpr std::uint8_t kNoOptimizer = 0;
constexpr std::uint8_t kWithMoments = 1;
constexpr std::uint8_t kStepOnly = 2;

constexpr std::array<char, 8> kMagic = {'S', 'V', 'L', 'M', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_doubles(std::ofstream& out, std::span<const double> values) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) {
            throw CheckpointError("cannot open checkpoint " + path.string());
        }
    }

    template <typename T>
    T get() {
        T value{};
        read(&value, sizeof(T));
        return value;
    }

    void read(void* dst, std::size_t bytes) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in_.gcount()) != bytes) {
            throw CheckpointError("checkpoint " + path_.string() + " is truncated");
        }
    }

    void read_doubles(std::span<double> dst) { read(dst.data(), dst.size_bytes()); }

    bool at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

json config_json(const ModelConfig& c) {
    return json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model},         {"n_heads", c.n_heads},
                {"n_layers", c.n_layers},     {"d_ff", c.d_ff},               {"max_seq_len", c.max_seq_len},
                {"seed", c.seed}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TransformerLM& model, const Tokenizer& tokenizer,
                     const OptimizerState* optimizer) {
    json header;
    header["model"] = config_json(model.config());
    header["tokenizer"] = utf8_encode(tokenizer.symbols());
    json params = json::array();
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        params.push_back(json{{"name", model.parameter_names()[i]}, {"shape", model.parameters()[i].shape()}});
    }
    header["parameters"] = std::move(params);
    const std::string blob = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CheckpointError("cannot write checkpoint " + path.string());
    }
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, model.config().seed);
    put<std::uint64_t>(out, blob.size());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    for (const Tensor& p : model.parameters()) {
        put_doubles(out, p.data());
    }
    if (optimizer == nullptr) {
        put<std::uint8_t>(out, kNoOptimizer);
    } else if (optimizer->m.empty()) {
        put<std::uint8_t>(out, kStepOnly);
        put<std::uint64_t>(out, optimizer->step);
    } else {
        if (optimizer->m.size() != model.parameters().size() || optimizer->v.size() != model.parameters().size()) {
            throw CheckpointError("optimizer state does not match the model's parameters");
        }
        put<std::uint8_t>(out, kWithMoments);
        put<std::uint64_t>(out, optimizer->step);
        for (std::size_t i = 0; i < model.parameters().size(); ++i) {
            const std::size_t n = model.parameters()[i].numel();
            if (optimizer->m[i].size() != n || optimizer->v[i].size() != n) {
                throw CheckpointError("optimizer moment " + std::to_string(i) + " has the wrong size");
            }
            put_doubles(out, optimizer->m[i]);
            put_doubles(out, optimizer->v[i]);
        }
    }
    if (!out) {
        throw CheckpointError("write failed for checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    Reader in(path);
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (magic != kMagic) {
        throw CheckpointError(path.string() + " is not a checkpoint file");
    }
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw CheckpointError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
    }
    const auto seed = in.get<std::uint64_t>();
    const auto header_len = in.get<std::uint64_t>();
    if (header_len > (std::uint64_t{1} << 30)) {
        throw CheckpointError("checkpoint header length is implausible");
    }
    std::string blob(header_len, '\0');
    in.read(blob.data(), blob.size());

    json header;
    try {
        header = json::parse(blob);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
    }
    ModelConfig cfg;
    try {
        const json& m = header.at("model");
        cfg.vocab_size = m.at("vocab_size").get<std::size_t>();
        cfg.d_model = m.at("d_model").get<std::size_t>();
        cfg.n_heads = m.at("n_heads").get<std::size_t>();
        cfg.n_layers = m.at("n_layers").get<std::size_t>();
        cfg.d_ff = m.at("d_ff").get<std::size_t>();
        cfg.max_seq_len = m.at("max_seq_len").get<std::size_t>();
        cfg.seed = m.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint header lacks model config: ") + e.what());
    }
    if (cfg.seed != seed) {
        throw CheckpointError("checkpoint seed field disagrees with its header");
    }
    Tokenizer tokenizer = Tokenizer::from_symbols(utf8_decode(header.at("tokenizer").get<std::string>()));
    if (tokenizer.size() != cfg.vocab_size) {
        throw CheckpointError("checkpoint tokenizer size does not match vocab_size");
    }

    TransformerLM model(cfg);
    const json& params = header.at("parameters");
    if (params.size() != model.parameters().size()) {
        throw CheckpointError("checkpoint holds " + std::to_string(params.size()) + " parameter tensors, expected " +
                              std::to_string(model.parameters().size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = model.parameters()[i];
        if (params[i].at("name").get<std::string>() != model.parameter_names()[i] ||
            params[i].at("shape").get<Shape>() != p.shape()) {
            throw CheckpointError("checkpoint parameter " + std::to_string(i) + " does not match the model layout");
        }
    }
    for (Tensor& p : model.parameters()) {
        in.read_doubles(p.data());
    }
    std::optional<OptimizerState> optimizer;
    const auto optimizer_kind = in.get<std::uint8_t>();
    if (optimizer_kind != kNoOptimizer && optimizer_kind != kWithMoments && optimizer_kind != kStepOnly) {
        throw CheckpointError("unknown optimizer section tag in checkpoint");
    }
    if (optimizer_kind != kNoOptimizer) {
        OptimizerState state;
        state.step = in.get<std::uint64_t>();
        if (optimizer_kind == kWithMoments) {
            for (const Tensor& p : model.parameters()) {
                state.m.emplace_back(p.numel());
                state.v.emplace_back(p.numel());
                in.read_doubles(state.m.back());
                in.read_doubles(state.v.back());
            }
        }
        optimizer = std::move(state);
    }
    if (!in.at_end()) {
        throw CheckpointError("trailing bytes after checkpoint payload");
    }
    return Checkpoint{std::move(model), std::move(tokenizer), std::move(optimizer)};
}

}  // namespace sevlm
