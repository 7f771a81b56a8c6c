#include "camref/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "camref/errors.hpp"
#include "camref/rng.hpp"

namespace camref {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

EmbeddingSet::EmbeddingSet(Matrix features, std::vector<CameraId> camera_ids, std::uint32_t num_cameras,
                           std::optional<std::vector<IdentityLabel>> identities)
    : features_(std::move(features)),
      camera_ids_(std::move(camera_ids)),
      num_cameras_(num_cameras),
      identities_(std::move(identities)) {
    if (features_.rows() == 0 || features_.cols() == 0) throw ArgumentError("embedding set needs N >= 1 and D >= 1");
    if (camera_ids_.size() != features_.rows()) throw ArgumentError("camera_ids length differs from row count");
    if (identities_ && identities_->size() != features_.rows())
        throw ArgumentError("identities length differs from row count");
    if (num_cameras_ == 0) throw ArgumentError("camera count must be >= 1");
    std::vector<bool> seen(num_cameras_, false);
    for (CameraId c : camera_ids_) {
        if (c >= num_cameras_) throw ArgumentError("camera id " + std::to_string(c) + " >= camera count");
        seen[c] = true;
    }
    for (std::uint32_t c = 0; c < num_cameras_; ++c)
        if (!seen[c]) throw ArgumentError("camera " + std::to_string(c) + " has no rows");
}

std::span<const IdentityLabel> EmbeddingSet::identities() const {
    if (!identities_) throw ContractViolation("embedding set carries no identities");
    return *identities_;
}

EmbeddingSet EmbeddingSet::l2_normalized() const {
    Matrix f = features_;
    l2_normalize_rows(f);
    return with_features(std::move(f));
}

EmbeddingSet EmbeddingSet::with_features(Matrix features) const {
    if (features.rows() != size()) throw ArgumentError("replacement features must keep N");
    return EmbeddingSet(std::move(features), camera_ids_, num_cameras_, identities_);
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> indices) const {
    std::vector<CameraId> cams;
    cams.reserve(indices.size());
    std::optional<std::vector<IdentityLabel>> ids;
    if (identities_) ids.emplace().reserve(indices.size());
    for (std::size_t i : indices) {
        cams.push_back(camera_ids_[i]);
        if (ids) ids->push_back((*identities_)[i]);
    }
    // Cameras absent from the subset are compacted to keep camera ids dense.
    // Per-camera views record their original camera in CameraSplit::camera.
    std::uint32_t c = num_cameras_;
    std::vector<bool> seen(c, false);
    for (CameraId id : cams) seen[id] = true;
    if (!std::ranges::all_of(seen, [](bool b) { return b; })) {
        std::vector<CameraId> remap(c, 0);
        CameraId next = 0;
        for (std::uint32_t k = 0; k < c; ++k)
            if (seen[k]) remap[k] = next++;
        for (CameraId& id : cams) id = remap[id];
        c = next;
    }
    return EmbeddingSet(select_rows(features_, indices), std::move(cams), c, std::move(ids));
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
    if (name == "csv") return EmbeddingFormat::Csv;
    if (name == "bin") return EmbeddingFormat::Bin;
    throw ArgumentError("unknown embedding format '" + std::string(name) + "' (expected csv or bin)");
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(ParseError::Kind::BadNumber, line,
                         "line " + std::to_string(line) + ": cannot parse " + what + " '" + std::string(field) + "'");
    return value;
}

EmbeddingSet load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(ParseError::Kind::Header, 1, "line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "camera")
        throw ParseError(ParseError::Kind::Header, 1, "line 1: header must start with id,camera");
    const bool has_labels = header[2] == "label";
    const std::size_t first_feature = has_labels ? 3 : 2;
    const std::size_t dim = header.size() - first_feature;
    if (dim == 0) throw ParseError(ParseError::Kind::Header, 1, "line 1: no feature columns");
    for (std::size_t k = 0; k < dim; ++k) {
        if (header[first_feature + k] != "f" + std::to_string(k))
            throw ParseError(ParseError::Kind::Header, 1,
                             "line 1: expected column f" + std::to_string(k) + ", got '" +
                                 std::string(header[first_feature + k]) + "'");
    }

    std::vector<double> values;
    std::vector<CameraId> cams;
    std::vector<IdentityLabel> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != header.size())
            throw ParseError(ParseError::Kind::RowWidth, line_no,
                             "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                 " columns, got " + std::to_string(fields.size()));
        const auto cam = parse_number<unsigned>(fields[1], line_no, "camera");
        if (cam > 0xffff)
            throw ParseError(ParseError::Kind::CameraRange, line_no,
                             "line " + std::to_string(line_no) + ": camera id out of range");
        cams.push_back(static_cast<CameraId>(cam));
        if (has_labels) labels.push_back(parse_number<IdentityLabel>(fields[2], line_no, "label"));
        for (std::size_t k = 0; k < dim; ++k) {
            const double v = parse_number<double>(fields[first_feature + k], line_no, "feature");
            if (!std::isfinite(v))
                throw ParseError(ParseError::Kind::NonFinite, line_no,
                                 "line " + std::to_string(line_no) + ": non-finite feature f" + std::to_string(k));
            values.push_back(v);
        }
    }
    if (cams.empty()) throw ParseError(ParseError::Kind::Truncated, line_no, "no data rows");

    const std::uint32_t num_cameras = *std::ranges::max_element(cams) + 1u;
    std::vector<bool> seen(num_cameras, false);
    for (CameraId c : cams) seen[c] = true;
    for (std::uint32_t c = 0; c < num_cameras; ++c)
        if (!seen[c])
            throw ParseError(ParseError::Kind::CameraRange, 0,
                             "camera " + std::to_string(c) + " has no rows (camera ids must be dense)");

    Matrix features(cams.size(), dim);
    std::ranges::copy(values, features.data().begin());
    std::optional<std::vector<IdentityLabel>> ids;
    if (has_labels) ids = std::move(labels);
    return EmbeddingSet(std::move(features), std::move(cams), num_cameras, std::move(ids));
}

class ByteReader {
public:
    explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    template <class T>
    T read() {
        if (pos_ + sizeof(T) > bytes_.size())
            throw ParseError(ParseError::Kind::Truncated, pos_,
                             "byte " + std::to_string(pos_) + ": unexpected end of file");
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

std::vector<char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EmbeddingSet load_bin(const std::filesystem::path& path) {
    ByteReader r(read_all(path));
    char magic[4];
    for (char& m : magic) m = r.read<char>();
    if (std::memcmp(magic, "EMB1", 4) != 0) throw ParseError(ParseError::Kind::Header, 0, "byte 0: bad magic");
    const auto n = r.read<std::uint32_t>();
    const auto d = r.read<std::uint32_t>();
    const auto c = r.read<std::uint32_t>();
    const auto has_labels = r.read<std::uint8_t>();
    if (n == 0 || d == 0 || c == 0) throw ParseError(ParseError::Kind::Header, 4, "byte 4: N, D and C must be >= 1");
    if (has_labels > 1) throw ParseError(ParseError::Kind::Header, 16, "byte 16: has_labels must be 0 or 1");
    const std::size_t expected = std::size_t{n} * 2 + (has_labels ? std::size_t{n} * 4 : 0) + std::size_t{n} * d * 4;
    if (r.remaining() < expected)
        throw ParseError(ParseError::Kind::Truncated, r.pos(),
                         "byte " + std::to_string(r.pos()) + ": file shorter than header implies");

    std::vector<CameraId> cams(n);
    for (auto& cam : cams) {
        const std::size_t at = r.pos();
        cam = r.read<std::uint16_t>();
        if (cam >= c)
            throw ParseError(ParseError::Kind::CameraRange, at,
                             "byte " + std::to_string(at) + ": camera id " + std::to_string(cam) +
                                 " >= declared C=" + std::to_string(c));
    }
    std::optional<std::vector<IdentityLabel>> ids;
    if (has_labels) {
        ids.emplace(n);
        for (auto& id : *ids) id = r.read<std::uint32_t>();
    }
    Matrix features(n, d);
    for (double& v : features.data()) {
        const std::size_t at = r.pos();
        const float f = r.read<float>();
        if (!std::isfinite(f))
            throw ParseError(ParseError::Kind::NonFinite, at, "byte " + std::to_string(at) + ": non-finite feature");
        v = f;
    }
    if (r.remaining() != 0)
        throw ParseError(ParseError::Kind::Truncated, r.pos(), "byte " + std::to_string(r.pos()) + ": trailing bytes");
    try {
        return EmbeddingSet(std::move(features), std::move(cams), c, std::move(ids));
    } catch (const ArgumentError& e) {
        throw ParseError(ParseError::Kind::CameraRange, 17, e.what());
    }
}

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

} // namespace

EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
    return format == EmbeddingFormat::Csv ? load_csv(path) : load_bin(path);
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path, EmbeddingFormat format) {
    std::string out;
    if (format == EmbeddingFormat::Csv) {
        out += "id,camera";
        if (set.has_identities()) out += ",label";
        for (std::size_t k = 0; k < set.dim(); ++k) out += ",f" + std::to_string(k);
        out += '\n';
        char buf[64];
        for (std::size_t i = 0; i < set.size(); ++i) {
            out += std::to_string(i) + ',' + std::to_string(set.camera_ids()[i]);
            if (set.has_identities()) out += ',' + std::to_string(set.identities()[i]);
            for (double v : set.features().row(i)) {
                const auto res = std::to_chars(buf, buf + sizeof buf, v);
                out += ',';
                out.append(buf, res.ptr);
            }
            out += '\n';
        }
    } else {
        out.append("EMB1", 4);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(set.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim()));
        put<std::uint32_t>(out, set.num_cameras());
        put<std::uint8_t>(out, set.has_identities() ? 1 : 0);
        for (CameraId c : set.camera_ids()) put<std::uint16_t>(out, c);
        if (set.has_identities())
            for (IdentityLabel id : set.identities()) put<std::uint32_t>(out, id);
        for (double v : set.features().data()) put<float>(out, static_cast<float>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<CameraSplit> split_by_camera(const EmbeddingSet& set) {
    std::vector<std::vector<std::size_t>> buckets(set.num_cameras());
    for (std::size_t i = 0; i < set.size(); ++i) buckets[set.camera_ids()[i]].push_back(i);
    std::vector<CameraSplit> out;
    out.reserve(buckets.size());
    for (std::uint32_t c = 0; c < set.num_cameras(); ++c) {
        auto view = set.subset(buckets[c]);
        out.push_back({static_cast<CameraId>(c), std::move(buckets[c]), std::move(view)});
    }
    return out;
}

void SyntheticSpec::validate() const {
    if (num_identities < 1 || cameras < 1 || images_per_identity_per_camera < 1 || dim < 1)
        throw ArgumentError("synthetic spec counts must all be >= 1");
    if (cameras > 0xffff) throw ArgumentError("synthetic spec: too many cameras");
    if (!(identity_spread >= 0.0) || !(camera_shift_strength >= 0.0))
        throw ArgumentError("synthetic spec spreads must be >= 0");
}

EmbeddingSet generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dim;
    const std::size_t n = std::size_t{spec.num_identities} * spec.cameras * spec.images_per_identity_per_camera;
    std::normal_distribution<double> gauss(0.0, 1.0);

    Engine id_rng(derive_seed(spec.seed, stream::synthetic_identity));
    Matrix bases(spec.num_identities, d);
    for (std::size_t i = 0; i < bases.rows(); ++i) {
        for (double& v : bases.row(i)) v = gauss(id_rng);
        normalize_in_place(bases.row(i));
    }

    // Per camera: x -> x + s/2 * G x / sqrt(d) + s * b, with G Gaussian and b a unit vector.
    const double s = spec.camera_shift_strength;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<Matrix> mixing;
    Matrix biases(spec.cameras, d);
    for (std::uint32_t c = 0; c < spec.cameras; ++c) {
        Engine cam_rng(derive_seed(spec.seed, stream::synthetic_camera, c));
        Matrix g(d, d);
        for (double& v : g.data()) v = gauss(cam_rng);
        mixing.push_back(std::move(g));
        for (double& v : biases.row(c)) v = gauss(cam_rng);
        normalize_in_place(biases.row(c));
    }

    Engine noise_rng(derive_seed(spec.seed, stream::synthetic_noise));
    const double noise_std = spec.identity_spread * inv_sqrt_d;
    Matrix features(n, d);
    std::vector<CameraId> cams(n);
    std::vector<IdentityLabel> ids(n);
    std::vector<double> clean(d);
    std::size_t row = 0;
    for (std::uint32_t id = 0; id < spec.num_identities; ++id) {
        for (std::uint32_t c = 0; c < spec.cameras; ++c) {
            for (std::uint32_t k = 0; k < spec.images_per_identity_per_camera; ++k, ++row) {
                for (std::size_t j = 0; j < d; ++j) clean[j] = bases(id, j) + noise_std * gauss(noise_rng);
                auto out = features.row(row);
                for (std::size_t j = 0; j < d; ++j) {
                    double mixed = 0.0;
                    if (s > 0.0) mixed = dot(mixing[c].row(j), clean) * inv_sqrt_d;
                    out[j] = clean[j] + 0.5 * s * mixed + s * biases(c, j);
                }
                normalize_in_place(out);
                cams[row] = static_cast<CameraId>(c);
                ids[row] = id;
            }
        }
    }
    return EmbeddingSet(std::move(features), std::move(cams), spec.cameras, std::move(ids));
}

} // namespace camref
