#include "camref/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "camref/errors.hpp"
#include "camref/kernels.hpp"

namespace camref {

LinearEncoder LinearEncoder::identity(std::size_t dim) {
    LinearEncoder enc{Matrix(dim, dim), std::vector<double>(dim, 0.0)};
    for (std::size_t i = 0; i < dim; ++i) enc.weights(i, i) = 1.0;
    return enc;
}

Matrix encode(const LinearEncoder& encoder, const Matrix& features) {
    if (features.cols() != encoder.input_dim())
        throw ArgumentError("encode: input width " + std::to_string(features.cols()) + " != encoder width " +
                            std::to_string(encoder.input_dim()));
    return kernels::affine_normalize(features, encoder.weights, encoder.bias);
}

namespace {

void check_batch(const LinearEncoder& encoder, const Matrix& batch, std::span<const ClusterLabel> labels,
                 const MemoryBank& bank) {
    if (batch.cols() != encoder.input_dim()) throw ArgumentError("sgd_step: batch width != encoder input width");
    if (bank.dim() != encoder.output_dim()) throw ArgumentError("sgd_step: bank width != encoder output width");
    if (labels.size() != batch.rows()) throw ArgumentError("sgd_step: label count != batch rows");
    if (batch.rows() == 0) throw ArgumentError("sgd_step: empty batch");
    for (ClusterLabel l : labels) {
        if (l == kDiscarded) throw ContractViolation("sgd_step: discarded item in batch");
        if (l < 0 || static_cast<std::size_t>(l) >= bank.size())
            throw ContractViolation("sgd_step: label " + std::to_string(l) + " outside the memory bank");
    }
}

} // namespace

double batch_loss(const LinearEncoder& encoder, const Matrix& batch, std::span<const ClusterLabel> labels,
                  const MemoryBank& bank) {
    check_batch(encoder, batch, labels, bank);
    const Matrix y = encode(encoder, batch);
    double total = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r)
        total += cluster_nce_loss(y.row(r), static_cast<std::size_t>(labels[r]), bank);
    return total / static_cast<double>(batch.rows());
}

double sgd_step(LinearEncoder& encoder, const Matrix& batch, std::span<const ClusterLabel> labels, MemoryBank& bank,
                double learning_rate) {
    check_batch(encoder, batch, labels, bank);
    const std::size_t din = encoder.input_dim();
    const std::size_t dout = encoder.output_dim();
    const double inv_b = 1.0 / static_cast<double>(batch.rows());

    Matrix queries(batch.rows(), dout);
    Matrix grad_w(din, dout);
    std::vector<double> grad_b(dout, 0.0);
    std::vector<double> z(dout), g(dout), dz(dout);
    double total = 0.0;

    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const auto x = batch.row(r);
        for (std::size_t j = 0; j < dout; ++j) z[j] = encoder.bias[j];
        for (std::size_t k = 0; k < din; ++k) {
            const auto w = encoder.weights.row(k);
            for (std::size_t j = 0; j < dout; ++j) z[j] += x[k] * w[j];
        }
        const double zn = norm(z);
        auto y = queries.row(r);
        if (zn == 0.0) {
            // Degenerate projection: no direction to differentiate.
            total += cluster_nce_loss(y, static_cast<std::size_t>(labels[r]), bank);
            continue;
        }
        for (std::size_t j = 0; j < dout; ++j) y[j] = z[j] / zn;
        total += cluster_nce_loss_and_grad(y, static_cast<std::size_t>(labels[r]), bank, g);

        // d/dz of z/|z| applied to g: (g − y (y·g)) / |z|
        const double yg = dot(y, g);
        for (std::size_t j = 0; j < dout; ++j) dz[j] = (g[j] - y[j] * yg) / zn * inv_b;
        for (std::size_t k = 0; k < din; ++k) {
            if (x[k] == 0.0) continue;
            auto gw = grad_w.row(k);
            for (std::size_t j = 0; j < dout; ++j) gw[j] += x[k] * dz[j];
        }
        for (std::size_t j = 0; j < dout; ++j) grad_b[j] += dz[j];
    }

    if (learning_rate != 0.0) {
        auto w = encoder.weights.data();
        const auto gw = grad_w.data();
        for (std::size_t t = 0; t < w.size(); ++t) w[t] -= learning_rate * gw[t];
        for (std::size_t j = 0; j < dout; ++j) encoder.bias[j] -= learning_rate * grad_b[j];
    }
    for (std::size_t r = 0; r < batch.rows(); ++r)
        if (norm(queries.row(r)) > 0.0) bank.update(queries.row(r), static_cast<std::size_t>(labels[r]));
    return total * inv_b;
}

namespace {

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

} // namespace

void save_encoder(const LinearEncoder& encoder, const std::filesystem::path& path) {
    std::string out("ENC1");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(encoder.input_dim()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(encoder.output_dim()));
    for (double v : encoder.weights.data()) put<double>(out, v);
    for (double v : encoder.bias) put<double>(out, v);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

LinearEncoder load_encoder(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    const std::vector<char> bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "ENC1", 4) != 0)
        throw ParseError(ParseError::Kind::Header, 0, "byte 0: bad encoder magic");
    std::uint32_t din = 0, dout = 0;
    std::memcpy(&din, bytes.data() + 4, 4);
    std::memcpy(&dout, bytes.data() + 8, 4);
    const std::size_t expected = 12 + (std::size_t{din} * dout + dout) * sizeof(double);
    if (din == 0 || dout == 0 || bytes.size() != expected)
        throw ParseError(ParseError::Kind::Truncated, 12, "byte 12: encoder payload size mismatch");
    LinearEncoder enc{Matrix(din, dout), std::vector<double>(dout)};
    std::memcpy(enc.weights.data().data(), bytes.data() + 12, std::size_t{din} * dout * sizeof(double));
    std::memcpy(enc.bias.data(), bytes.data() + 12 + std::size_t{din} * dout * sizeof(double), dout * sizeof(double));
    return enc;
}

} // namespace camref
