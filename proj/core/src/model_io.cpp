#include "cdforest/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace cdforest {

namespace {

constexpr char kMagic[8] = {'C', 'D', 'F', 'O', 'R', 'E', 'S', 'T'};

std::uint64_t fnv1a64(const char* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const char* data, std::size_t size) { buf_.append(data, size); }
    void reserve(std::size_t size) { buf_.reserve(size); }

    const std::string& buffer() const { return buf_; }

private:
    std::string buf_;
};

class Cursor {
public:
    Cursor(const char* data, std::size_t size) : data_(data), size_(size) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 8;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t bytes) {
        if (size_ - pos_ < bytes) {
            throw ModelCorruptError("corrupt model file: unexpected end of data");
        }
    }

    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_model(const Forest& forest, const std::string& path) {
    const std::size_t n = forest.n_training();
    Writer w;
    w.reserve(64 + n * 8 +
              forest.n_trees() * (forest.trees().front().n_nodes() * 28 + n * 8 + 16));

    w.raw(kMagic, sizeof(kMagic));
    w.u32(kModelFormatVersion);
    const ForestHyperparameters& hp = forest.hyperparameters();
    w.u64(n);
    w.u64(forest.dimension());
    w.u64(hp.n_trees);
    w.u64(hp.max_features);
    w.u64(hp.min_samples_leaf);
    w.u64(hp.seed);
    for (const double y : forest.responses()) w.f64(y);

    for (const Tree& tree : forest.trees()) {
        w.u64(tree.seed());
        w.u64(tree.n_nodes());
        for (const TreeNode& nd : tree.nodes()) {
            w.i32(nd.left);
            w.i32(nd.right);
            w.i32(nd.feature);
            w.f64(nd.threshold);
            w.u32(nd.members_begin);
            w.u32(nd.members_end);
            w.u32(nd.bootstrap_total);
        }
        for (const std::uint32_t c : tree.bootstrap().counts) w.u32(c);
        w.u64(tree.member_indices().size());
        for (const std::uint32_t id : tree.member_indices()) w.u32(id);
    }
    const std::uint64_t checksum = fnv1a64(w.buffer().data(), w.buffer().size());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelIoError("cannot open file for writing: " + path);
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    char trailer[8];
    for (int i = 0; i < 8; ++i) trailer[i] = static_cast<char>(checksum >> (8 * i));
    out.write(trailer, 8);
    if (!out) throw ModelIoError("write failed: " + path);
}

namespace {

Tree read_tree(Cursor& c, std::size_t n, std::size_t d) {
    const std::uint64_t seed = c.u64();

    const std::uint64_t n_nodes = c.u64();
    if (n_nodes == 0 || n_nodes > (1ULL << 31)) {
        throw ModelCorruptError("corrupt model file: bad node count");
    }
    std::vector<TreeNode> nodes(n_nodes);
    for (std::uint64_t i = 0; i < n_nodes; ++i) {
        TreeNode& nd = nodes[i];
        nd.left = c.i32();
        nd.right = c.i32();
        nd.feature = c.i32();
        nd.threshold = c.f64();
        nd.members_begin = c.u32();
        nd.members_end = c.u32();
        nd.bootstrap_total = c.u32();
    }

    BootstrapCounts bootstrap;
    bootstrap.counts.resize(n);
    for (std::size_t j = 0; j < n; ++j) bootstrap.counts[j] = c.u32();

    const std::uint64_t member_count = c.u64();
    if (member_count != n) {
        throw ModelCorruptError("corrupt model file: bad member table size");
    }
    std::vector<std::uint32_t> member_indices(n);
    for (std::size_t j = 0; j < n; ++j) member_indices[j] = c.u32();

    try {
        return Tree::from_parts(std::move(nodes), std::move(member_indices),
                                std::move(bootstrap), seed, d);
    } catch (const std::invalid_argument& e) {
        throw ModelCorruptError(std::string("corrupt model file: ") + e.what());
    }
}

}  // namespace

Forest load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIoError("cannot open file: " + path);
    std::string blob((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

    if (blob.size() < sizeof(kMagic) + 4 + 8) {
        throw ModelCorruptError("corrupt model file: truncated");
    }
    if (std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ModelIoError("not a cdforest model file: " + path);
    }

    const std::size_t payload_size = blob.size() - 8;
    std::uint64_t stored_checksum = 0;
    for (int i = 0; i < 8; ++i) {
        stored_checksum |=
            static_cast<std::uint64_t>(static_cast<unsigned char>(blob[payload_size + i]))
            << (8 * i);
    }

    Cursor header(blob.data() + sizeof(kMagic), 4);
    const std::uint32_t version = header.u32();
    if (version != kModelFormatVersion) {
        throw ModelVersionError("model format version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(kModelFormatVersion) + ")");
    }
    if (fnv1a64(blob.data(), payload_size) != stored_checksum) {
        throw ModelCorruptError("corrupt model file: checksum mismatch");
    }

    Cursor c(blob.data() + sizeof(kMagic) + 4, payload_size - sizeof(kMagic) - 4);
    const std::uint64_t n = c.u64();
    const std::uint64_t d = c.u64();
    ForestHyperparameters hp;
    hp.n_trees = c.u64();
    hp.max_features = c.u64();
    hp.min_samples_leaf = c.u64();
    hp.seed = c.u64();
    if (n == 0 || d == 0 || hp.n_trees == 0) {
        throw ModelCorruptError("corrupt model file: empty dimensions");
    }

    std::vector<double> responses(n);
    for (std::uint64_t j = 0; j < n; ++j) responses[j] = c.f64();

    std::vector<Tree> trees;
    trees.reserve(hp.n_trees);
    for (std::uint64_t t = 0; t < hp.n_trees; ++t) {
        trees.push_back(read_tree(c, n, d));
    }
    if (c.remaining() != 0) {
        throw ModelCorruptError("corrupt model file: trailing bytes");
    }
    return Forest::from_parts(std::move(trees), hp, std::move(responses));
}

}  // namespace cdforest
