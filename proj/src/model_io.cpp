#include "facehop/model_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <string>
#include <utility>

#include "facehop/errors.hpp"

namespace facehop {

namespace {

using Reason = CorruptModelError::Reason;

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kTagConfig = 1;
constexpr std::uint32_t kTagNodes = 2;
constexpr std::uint32_t kTagUnits = 3;
constexpr std::uint32_t kTagFeatures = 4;
constexpr std::uint32_t kTagEnsemble = 5;
constexpr std::uint32_t kSectionCount = 5;

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void vec(const Eigen::VectorXd& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
    }
    void matrix(const Eigen::MatrixXd& m) {
        u32(static_cast<std::uint32_t>(m.rows()));
        u32(static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
        }
    }
};

// Bounds-checked reads. Payload-structure overruns inside a section mean
// the bytes are wrong despite a good checksum, hence Malformed.
struct Reader {
    const std::uint8_t* p;
    const std::uint8_t* end;

    Reader(const std::uint8_t* begin, std::size_t len) : p(begin), end(begin + len) {}

    std::size_t remaining() const { return static_cast<std::size_t>(end - p); }
    void need(std::size_t n) const {
        if (remaining() < n) {
            throw CorruptModelError(Reason::Malformed, "model section data ends early");
        }
    }
    std::uint8_t u8() {
        need(1);
        return *p++;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(*p++) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(*p++) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        return s;
    }
    Eigen::VectorXd vec() {
        const std::uint32_t n = u32();
        need(static_cast<std::size_t>(n) * 8);
        Eigen::VectorXd v(n);
        for (std::uint32_t i = 0; i < n; ++i) v[i] = f64();
        return v;
    }
    Eigen::MatrixXd matrix() {
        const std::uint32_t rows = u32();
        const std::uint32_t cols = u32();
        // Dimensions beyond any real model would overflow the size check.
        if (rows > (1u << 24) || cols > (1u << 24)) {
            throw CorruptModelError(Reason::Malformed, "matrix dimensions out of range");
        }
        need(static_cast<std::size_t>(rows) * cols * 8);
        Eigen::MatrixXd m(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r) {
            for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = f64();
        }
        return m;
    }
};

void write_config(Writer& w, const FaceHopModel& model) {
    w.u8(model.variant == Variant::I ? 0 : 1);
    w.str(model.label_names[0]);
    w.str(model.label_names[1]);
    w.i32(model.tree.config.input_size);
    for (const HopSpec& hop : model.tree.config.hops) {
        w.i32(hop.window);
        w.u8(hop.mode.type == PartitionMode::Type::Threshold ? 0 : 1);
        w.f64(hop.mode.threshold);
        w.i32(hop.mode.n_intermediate);
        w.i32(hop.mode.n_discard);
        w.u8(hop.pool_after ? 1 : 0);
    }
    w.u64(model.tree.config.max_fit_patches);
    w.i32(model.features.n_components);
}

void read_config(Reader& r, FaceHopModel& model) {
    const std::uint8_t variant = r.u8();
    if (variant > 1) throw CorruptModelError(Reason::Malformed, "unknown variant code");
    model.variant = variant == 0 ? Variant::I : Variant::II;
    model.label_names[0] = r.str();
    model.label_names[1] = r.str();
    model.tree.config.input_size = r.i32();
    for (HopSpec& hop : model.tree.config.hops) {
        hop.window = r.i32();
        const std::uint8_t mode = r.u8();
        if (mode > 1) throw CorruptModelError(Reason::Malformed, "unknown partition mode code");
        hop.mode.type = mode == 0 ? PartitionMode::Type::Threshold : PartitionMode::Type::FixedCounts;
        hop.mode.threshold = r.f64();
        hop.mode.n_intermediate = r.i32();
        hop.mode.n_discard = r.i32();
        hop.pool_after = r.u8() != 0;
    }
    model.tree.config.max_fit_patches = r.u64();
    model.features.n_components = r.i32();
}

void write_nodes(Writer& w, const FaceHopModel& model) {
    w.u64(model.tree.nodes.size());
    for (const TreeNode& node : model.tree.nodes) {
        w.u8(static_cast<std::uint8_t>(node.hop));
        w.i32(node.parent);
        w.i32(node.unit);
        w.i32(node.channel);
        w.f64(node.energy);
        w.u8(static_cast<std::uint8_t>(node.kind));
    }
}

void read_nodes(Reader& r, FaceHopModel& model) {
    const std::uint64_t count = r.u64();
    model.tree.nodes.clear();
    model.tree.nodes.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        TreeNode node;
        node.hop = r.u8();
        node.parent = r.i32();
        node.unit = r.i32();
        node.channel = r.i32();
        node.energy = r.f64();
        const std::uint8_t kind = r.u8();
        if (node.hop < 1 || node.hop > 3 || kind > 2) {
            throw CorruptModelError(Reason::Malformed, "node record out of range");
        }
        node.kind = static_cast<NodeKind>(kind);
        model.tree.nodes.push_back(node);
    }
    // The kept/forwarded layout is positional bookkeeping over the node
    // list, rebuilt here exactly as fitting built it.
    for (const TreeNode& node : model.tree.nodes) {
        if (node.kind == NodeKind::Discard) continue;
        std::vector<int>& kept = model.tree.kept_nodes[static_cast<std::size_t>(node.hop - 1)];
        const int id = static_cast<int>(&node - model.tree.nodes.data());
        if (node.kind == NodeKind::Intermediate) {
            model.tree.forwarded_columns[static_cast<std::size_t>(node.hop - 1)].push_back(
                static_cast<int>(kept.size()));
        }
        kept.push_back(id);
    }
}

void write_units(Writer& w, const FaceHopModel& model) {
    for (const std::vector<SaabUnit>& hop_units : model.tree.units) {
        w.u32(static_cast<std::uint32_t>(hop_units.size()));
        for (const SaabUnit& unit : hop_units) {
            w.i32(unit.window);
            w.f64(unit.bias);
            w.matrix(unit.ac_kernels);
            w.vec(unit.energies);
        }
    }
}

void read_units(Reader& r, FaceHopModel& model) {
    model.tree.units.assign(3, {});
    for (std::vector<SaabUnit>& hop_units : model.tree.units) {
        const std::uint32_t count = r.u32();
        hop_units.resize(count);
        for (SaabUnit& unit : hop_units) {
            unit.window = r.i32();
            unit.bias = r.f64();
            unit.ac_kernels = r.matrix();
            unit.energies = r.vec();
            if (unit.window < 1 || unit.energies.size() != unit.ac_kernels.rows() + 1 ||
                (unit.ac_kernels.rows() > 0 && unit.ac_kernels.cols() != unit.patch_dim())) {
                throw CorruptModelError(Reason::Malformed, "unit record inconsistent");
            }
        }
    }
}

void write_features(Writer& w, const FaceHopModel& model) {
    w.u32(static_cast<std::uint32_t>(model.features.regions.size()));
    for (std::size_t i = 0; i < model.features.regions.size(); ++i) {
        const RegionSpec& region = model.features.regions[i];
        const RegionPCA& pca = model.features.pcas[i];
        w.str(region.name);
        w.u8(static_cast<std::uint8_t>(region.hop));
        w.i32(region.row_min);
        w.i32(region.row_max);
        w.i32(region.col_min);
        w.i32(region.col_max);
        w.i32(pca.fitted_channels);
        w.vec(pca.mean);
        w.matrix(pca.components);
    }
}

void read_features(Reader& r, FaceHopModel& model) {
    const std::uint32_t count = r.u32();
    model.features.regions.clear();
    model.features.pcas.clear();
    for (std::uint32_t i = 0; i < count; ++i) {
        RegionSpec region;
        RegionPCA pca;
        region.name = r.str();
        region.hop = r.u8();
        region.row_min = r.i32();
        region.row_max = r.i32();
        region.col_min = r.i32();
        region.col_max = r.i32();
        pca.fitted_channels = r.i32();
        pca.mean = r.vec();
        pca.components = r.matrix();
        if ((region.hop != 1 && region.hop != 2) || pca.mean.size() != region.dim() ||
            pca.components.cols() != region.dim()) {
            throw CorruptModelError(Reason::Malformed, "region record inconsistent");
        }
        model.features.regions.push_back(std::move(region));
        model.features.pcas.push_back(std::move(pca));
    }
}

void write_lr(Writer& w, const LRModel& lr) {
    w.vec(lr.scaler.mean);
    w.vec(lr.scaler.stddev);
    w.vec(lr.weights);
    w.f64(lr.intercept);
}

LRModel read_lr(Reader& r) {
    LRModel lr;
    lr.scaler.mean = r.vec();
    lr.scaler.stddev = r.vec();
    lr.weights = r.vec();
    lr.intercept = r.f64();
    if (lr.scaler.mean.size() != lr.weights.size() || lr.scaler.stddev.size() != lr.weights.size()) {
        throw CorruptModelError(Reason::Malformed, "classifier record inconsistent");
    }
    return lr;
}

void write_ensemble(Writer& w, const FaceHopModel& model) {
    w.u32(static_cast<std::uint32_t>(model.ensemble.base.size()));
    for (const LRModel& lr : model.ensemble.base) write_lr(w, lr);
    w.u32(static_cast<std::uint32_t>(model.ensemble.meta_groups.size()));
    for (int g : model.ensemble.meta_groups) w.i32(g);
    write_lr(w, model.ensemble.meta);
}

void read_ensemble(Reader& r, FaceHopModel& model) {
    const std::uint32_t base_count = r.u32();
    model.ensemble.base.clear();
    for (std::uint32_t i = 0; i < base_count; ++i) model.ensemble.base.push_back(read_lr(r));
    const std::uint32_t meta_count = r.u32();
    model.ensemble.meta_groups.clear();
    for (std::uint32_t i = 0; i < meta_count; ++i) {
        const int g = r.i32();
        if (g < 0 || static_cast<std::uint32_t>(g) >= base_count) {
            throw CorruptModelError(Reason::Malformed, "meta group index out of range");
        }
        model.ensemble.meta_groups.push_back(g);
    }
    model.ensemble.meta = read_lr(r);
}

std::uint32_t payload_crc(const std::uint8_t* data, std::size_t len) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(data), static_cast<uInt>(len)));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const FaceHopModel& model) {
    Writer payload;
    payload.u32(kSectionCount);
    const std::pair<std::uint32_t, void (*)(Writer&, const FaceHopModel&)> sections[] = {
        {kTagConfig, write_config},     {kTagNodes, write_nodes},
        {kTagUnits, write_units},       {kTagFeatures, write_features},
        {kTagEnsemble, write_ensemble},
    };
    for (const auto& [tag, write] : sections) {
        Writer body;
        write(body, model);
        payload.u32(tag);
        payload.u64(body.bytes.size());
        payload.bytes.insert(payload.bytes.end(), body.bytes.begin(), body.bytes.end());
    }

    Writer file;
    file.bytes = {'F', 'H', 'O', 'P'};
    file.u32(kVersion);
    file.bytes.insert(file.bytes.end(), payload.bytes.begin(), payload.bytes.end());
    file.u32(payload_crc(payload.bytes.data(), payload.bytes.size()));
    return file.bytes;
}

FaceHopModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12) {
        throw CorruptModelError(Reason::Truncated, "model file shorter than its fixed header");
    }
    if (std::memcmp(bytes.data(), "FHOP", 4) != 0) {
        throw CorruptModelError(Reason::BadMagic, "not a model file (bad magic)");
    }
    Reader header(bytes.data() + 4, 4);
    const std::uint32_t version = header.u32();
    if (version != kVersion) {
        throw CorruptModelError(Reason::UnsupportedVersion,
                                "unsupported model format version " + std::to_string(version));
    }

    const std::uint8_t* payload = bytes.data() + 8;
    const std::size_t payload_len = bytes.size() - 12;

    // Structural walk before anything else, so a cut-off file reports as
    // truncated rather than as a checksum accident.
    {
        Reader walk(payload, payload_len);
        if (walk.remaining() < 4) {
            throw CorruptModelError(Reason::Truncated, "model payload ends inside the section table");
        }
        const std::uint32_t count = walk.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            if (walk.remaining() < 12) {
                throw CorruptModelError(Reason::Truncated, "model payload ends inside a section header");
            }
            walk.u32();
            const std::uint64_t len = walk.u64();
            if (walk.remaining() < len) {
                throw CorruptModelError(Reason::Truncated, "model payload ends inside a section body");
            }
            walk.p += len;
        }
    }

    const std::uint32_t stored_crc = Reader(bytes.data() + bytes.size() - 4, 4).u32();
    if (payload_crc(payload, payload_len) != stored_crc) {
        throw CorruptModelError(Reason::ChecksumMismatch, "model payload checksum mismatch");
    }

    FaceHopModel model;
    bool seen[6] = {false, false, false, false, false, false};
    Reader r(payload, payload_len);
    const std::uint32_t count = r.u32();
    if (count != kSectionCount) {
        throw CorruptModelError(Reason::Malformed, "unexpected section count");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t tag = r.u32();
        const std::uint64_t len = r.u64();
        if (tag < 1 || tag > 5 || seen[tag]) {
            throw CorruptModelError(Reason::Malformed, "unknown or repeated section tag");
        }
        seen[tag] = true;
        Reader body(r.p, static_cast<std::size_t>(len));
        r.p += len;
        switch (tag) {
            case kTagConfig: read_config(body, model); break;
            case kTagNodes: read_nodes(body, model); break;
            case kTagUnits: read_units(body, model); break;
            case kTagFeatures: read_features(body, model); break;
            case kTagEnsemble: read_ensemble(body, model); break;
        }
        if (body.remaining() != 0) {
            throw CorruptModelError(Reason::Malformed, "section body has trailing bytes");
        }
    }
    if (r.remaining() != 0) {
        throw CorruptModelError(Reason::Malformed, "payload has bytes after the last section");
    }

    if (model.features.pcas.size() != model.features.regions.size() ||
        model.ensemble.base.size() != model.features.regions.size() + 1) {
        throw CorruptModelError(Reason::Malformed, "classifier and region sections disagree");
    }
    return model;
}

void save_model(const std::filesystem::path& path, const FaceHopModel& model) {
    const std::vector<std::uint8_t> bytes = serialize_model(model);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write model file " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw IoError("failed while writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot move model into place at " + path.string() + ": " + ec.message());
    }
}

FaceHopModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("failed while reading " + path.string());
    }
    return deserialize_model(bytes);
}

}  // namespace facehop
