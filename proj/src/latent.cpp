#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "wmbench/degrade.hpp"
#include "wmbench/rng.hpp"

namespace wmb {

std::vector<double> LatentCodec::encode(const Image& img) const {
    if (img.width != width || img.height != height || img.channels != channels)
        fail(ErrorCategory::Geometry, "LatentCodec::encode: geometry mismatch");
    const size_t n = dim();
    std::vector<double> z(static_cast<size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
        const double* col = basis.data() + static_cast<size_t>(j) * n;
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += col[i] * (img.samples[i] - mu[i]);
        z[static_cast<size_t>(j)] = s;
    }
    return z;
}

Image LatentCodec::decode(std::span<const double> z) const {
    if (z.size() != static_cast<size_t>(d))
        fail(ErrorCategory::Geometry, "LatentCodec::decode: latent size mismatch");
    const size_t n = dim();
    Image out(width, height, channels);
    std::copy(mu.begin(), mu.end(), out.samples.begin());
    for (int j = 0; j < d; ++j) {
        const double* col = basis.data() + static_cast<size_t>(j) * n;
        const double zj = z[static_cast<size_t>(j)];
        for (size_t i = 0; i < n; ++i) out.samples[i] += zj * col[i];
    }
    return out;
}

namespace {

// Fix sign: the largest-magnitude entry of each column is positive; ties
// break toward the earliest index.
void fix_sign(double* col, size_t n) {
    size_t arg = 0;
    double best = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double a = std::abs(col[i]);
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (col[arg] < 0.0)
        for (size_t i = 0; i < n; ++i) col[i] = -col[i];
}

void project_out(std::vector<double>& v, const std::vector<double>& basis,
                 int cols, size_t n) {
    for (int j = 0; j < cols; ++j) {
        const double* col = basis.data() + static_cast<size_t>(j) * n;
        double dot = 0.0;
        for (size_t i = 0; i < n; ++i) dot += v[i] * col[i];
        for (size_t i = 0; i < n; ++i) v[i] -= dot * col[i];
    }
}

}  // namespace

LatentCodec fit_latent_codec(const std::vector<Image>& corpus, int d) {
    if (corpus.empty()) fail(ErrorCategory::Config, "fit_latent_codec: empty corpus");
    if (d < 1) fail(ErrorCategory::Config, "fit_latent_codec: d must be >= 1");
    const int n = static_cast<int>(corpus.size());
    if (n < d)
        fail(ErrorCategory::Config,
             "fit_latent_codec: corpus size " + std::to_string(n) +
                 " < latent dimension " + std::to_string(d));
    for (const auto& img : corpus) {
        validate(img, "fit_latent_codec corpus");
        if (!img.same_geometry(corpus.front()))
            fail(ErrorCategory::Geometry,
                 "fit_latent_codec: corpus images must share dimensions");
    }

    LatentCodec codec;
    codec.width = corpus.front().width;
    codec.height = corpus.front().height;
    codec.channels = corpus.front().channels;
    codec.d = d;
    const size_t D = codec.dim();

    codec.mu.assign(D, 0.0);
    for (const auto& img : corpus)
        for (size_t i = 0; i < D; ++i) codec.mu[i] += img.samples[i];
    for (double& v : codec.mu) v /= n;

    // Gram trick: eigen-decompose the n x n matrix (Xc Xc^T) instead of the
    // D x D covariance; principal directions are Xc^T u_j / sqrt(lambda_j).
    Eigen::MatrixXd xc(n, static_cast<Eigen::Index>(D));
    for (int r = 0; r < n; ++r)
        for (size_t i = 0; i < D; ++i)
            xc(r, static_cast<Eigen::Index>(i)) =
                corpus[static_cast<size_t>(r)].samples[i] - codec.mu[i];
    Eigen::MatrixXd gram = xc * xc.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success)
        fail(ErrorCategory::Numeric, "fit_latent_codec: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; take the largest first.
    const double lam_max = std::max(es.eigenvalues()(n - 1), 0.0);
    const double lam_floor = std::max(lam_max, 1.0) * 1e-12;
    codec.basis.assign(D * static_cast<size_t>(d), 0.0);
    int filled = 0;
    for (int j = n - 1; j >= 0 && filled < d; --j) {
        const double lam = es.eigenvalues()(j);
        if (lam <= lam_floor) break;
        Eigen::VectorXd dir = xc.transpose() * es.eigenvectors().col(j);
        dir /= std::sqrt(lam);
        double* col = codec.basis.data() + static_cast<size_t>(filled) * D;
        for (size_t i = 0; i < D; ++i) col[i] = dir(static_cast<Eigen::Index>(i));
        // Re-orthonormalize against earlier columns to keep V^T V = I tight
        // even for small eigenvalues.
        std::vector<double> v(col, col + D);
        project_out(v, codec.basis, filled, D);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 0.5) continue;  // numerically dependent; handled by completion
        for (size_t i = 0; i < D; ++i) col[i] = v[i] / norm;
        fix_sign(col, D);
        ++filled;
    }
    // Deterministic completion for zero-variance directions: orthonormalize
    // canonical basis vectors in index order.
    for (size_t k = 0; k < D && filled < d; ++k) {
        std::vector<double> v(D, 0.0);
        v[k] = 1.0;
        project_out(v, codec.basis, filled, D);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 0.5) continue;
        double* col = codec.basis.data() + static_cast<size_t>(filled) * D;
        for (size_t i = 0; i < D; ++i) col[i] = v[i] / norm;
        fix_sign(col, D);
        ++filled;
    }
    if (filled < d)
        fail(ErrorCategory::Numeric,
             "fit_latent_codec: could not build " + std::to_string(d) +
                 " orthonormal directions");
    return codec;
}

Image add_latent_noise(const Image& img, const LatentCodec& codec,
                       const NoiseParams& p) {
    if (p.sigma < 0)
        fail(ErrorCategory::Config, "add_latent_noise: sigma must be >= 0");
    auto z = codec.encode(img);
    Rng rng(p.seed);
    for (double& v : z) v += p.sigma * rng.next_gaussian();
    Image out = codec.decode(z);
    clamp01(out);
    return out;
}

namespace {
constexpr char kMagic[8] = {'W', 'M', 'L', 'C', '1', '\n', 0, 0};

void put_u32(std::ofstream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) fail(ErrorCategory::Io, path + ": truncated codec file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * 8));
    } else {
        for (double x : v) {
            uint64_t bits;
            std::memcpy(&bits, &x, 8);
            unsigned char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
            out.write(reinterpret_cast<const char*>(b), 8);
        }
    }
}

void get_doubles(std::ifstream& in, std::vector<double>& v, const std::string& path) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * 8));
        if (!in) fail(ErrorCategory::Io, path + ": truncated codec file");
    } else {
        for (double& x : v) {
            unsigned char b[8];
            in.read(reinterpret_cast<char*>(b), 8);
            if (!in) fail(ErrorCategory::Io, path + ": truncated codec file");
            uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
            std::memcpy(&x, &bits, 8);
        }
    }
}
}  // namespace

void save_latent_codec(const LatentCodec& codec, const std::string& path,
                       const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCategory::Io, path + ": cannot open for writing");
    out.write(kMagic, 8);
    put_u32(out, static_cast<uint32_t>(codec.width));
    put_u32(out, static_cast<uint32_t>(codec.height));
    put_u32(out, static_cast<uint32_t>(codec.channels));
    put_u32(out, static_cast<uint32_t>(codec.d));
    put_doubles(out, codec.mu);
    put_doubles(out, codec.basis);
    if (!out) fail(ErrorCategory::Io, path + ": write failed");
    out.close();
    std::ofstream side(path + ".txt");
    if (!side) fail(ErrorCategory::Io, path + ".txt: cannot open for writing");
    side << "latent codec " << codec.width << "x" << codec.height << "x"
         << codec.channels << " d=" << codec.d << "\n"
         << provenance << "\n";
}

LatentCodec load_latent_codec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCategory::Io, path + ": cannot open for reading");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        fail(ErrorCategory::Io, path + ": not a latent codec file");
    LatentCodec codec;
    codec.width = static_cast<int>(get_u32(in, path));
    codec.height = static_cast<int>(get_u32(in, path));
    codec.channels = static_cast<int>(get_u32(in, path));
    codec.d = static_cast<int>(get_u32(in, path));
    if (codec.width <= 0 || codec.height <= 0 ||
        (codec.channels != 1 && codec.channels != 3) || codec.d < 1)
        fail(ErrorCategory::Io, path + ": corrupt codec header");
    codec.mu.resize(codec.dim());
    codec.basis.resize(codec.dim() * static_cast<size_t>(codec.d));
    get_doubles(in, codec.mu, path);
    get_doubles(in, codec.basis, path);
    return codec;
}

}  // namespace wmb
