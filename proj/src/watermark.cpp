#include "wmbench/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wmbench/dct.hpp"
#include "wmbench/fft.hpp"
#include "wmbench/rng.hpp"

namespace wmb {

namespace {
constexpr uint64_t kBitFieldTag = 0xb17f1e1d00000000ull;
}  // namespace

std::vector<uint8_t> random_payload(int nbits, uint64_t seed) {
    if (nbits < 1) fail(ErrorCategory::Config, "payload length must be >= 1");
    Rng rng(seed);
    std::vector<uint8_t> bits(static_cast<size_t>(nbits));
    for (auto& b : bits) b = rng.next_bool() ? 1 : 0;
    return bits;
}

std::string payload_to_hex(const std::vector<uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string hex;
    const size_t nbytes = (bits.size() + 7) / 8;
    for (size_t by = 0; by < nbytes; ++by) {
        int v = 0;
        for (size_t bi = 0; bi < 8; ++bi) {
            const size_t idx = by * 8 + bi;
            v = (v << 1) | (idx < bits.size() ? (bits[idx] & 1) : 0);
        }
        hex.push_back(digits[v >> 4]);
        hex.push_back(digits[v & 15]);
    }
    return hex;
}

std::vector<uint8_t> payload_from_hex(const std::string& hex, int nbits) {
    if (nbits < 1) fail(ErrorCategory::Config, "payload length must be >= 1");
    const size_t need = (static_cast<size_t>(nbits) + 7) / 8 * 2;
    if (hex.size() != need)
        fail(ErrorCategory::Config, "payload hex length " +
                                        std::to_string(hex.size()) +
                                        " does not match payload_bits " +
                                        std::to_string(nbits));
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        fail(ErrorCategory::Config, std::string("bad hex digit '") + c + "'");
    };
    std::vector<uint8_t> bits(static_cast<size_t>(nbits));
    for (size_t i = 0; i < bits.size(); ++i) {
        const int byte = (nibble(hex[i / 8 * 2]) << 4) | nibble(hex[i / 8 * 2 + 1]);
        bits[i] = (byte >> (7 - i % 8)) & 1;
    }
    return bits;
}

namespace {

// Zero-mean, unit-RMS pseudorandom plane for one payload bit.
std::vector<double> bit_field(int width, int height, uint64_t seed, int bit) {
    Rng rng(derive_seed(seed, kBitFieldTag | static_cast<uint64_t>(bit)));
    std::vector<double> p(static_cast<size_t>(width) * height);
    double mean = 0.0;
    for (double& v : p) {
        v = rng.next_gaussian();
        mean += v;
    }
    mean /= static_cast<double>(p.size());
    double ms = 0.0;
    for (double& v : p) {
        v -= mean;
        ms += v * v;
    }
    const double rms = std::sqrt(ms / static_cast<double>(p.size()));
    if (rms > 0)
        for (double& v : p) v /= rms;
    return p;
}

}  // namespace

AdditivePattern make_additive_pattern(int width, int height, uint64_t seed,
                                      const std::vector<uint8_t>& payload,
                                      double alpha) {
    if (width < 1 || height < 1)
        fail(ErrorCategory::Geometry, "make_additive_pattern: bad dimensions");
    if (payload.empty())
        fail(ErrorCategory::Config, "make_additive_pattern: empty payload");
    if (!(alpha >= 0.0 && alpha <= 0.2))
        fail(ErrorCategory::Config,
             "make_additive_pattern: alpha must be in [0, 0.2]");
    AdditivePattern wm;
    wm.width = width;
    wm.height = height;
    wm.seed = seed;
    wm.alpha = alpha;
    wm.payload = payload;
    const size_t n = static_cast<size_t>(width) * height;
    const int K = static_cast<int>(payload.size());
    wm.bit_fields.reserve(static_cast<size_t>(K));
    wm.w.assign(n, 0.0);
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(K));
    for (int i = 0; i < K; ++i) {
        wm.bit_fields.push_back(bit_field(width, height, seed, i));
        const double s = (payload[static_cast<size_t>(i)] ? 1.0 : -1.0) * inv_sqrt_k;
        const auto& p = wm.bit_fields.back();
        for (size_t j = 0; j < n; ++j) wm.w[j] += s * p[j];
    }
    // Exact re-centering and normalization.
    double mean = 0.0;
    for (double v : wm.w) mean += v;
    mean /= static_cast<double>(n);
    double ms = 0.0;
    for (double& v : wm.w) {
        v -= mean;
        ms += v * v;
    }
    const double rms = std::sqrt(ms / static_cast<double>(n));
    if (rms > 0)
        for (double& v : wm.w) v /= rms;
    return wm;
}

std::vector<double> flat_spectrum_plane(int width, int height, uint64_t seed) {
    if (width < 1 || height < 1)
        fail(ErrorCategory::Geometry, "flat_spectrum_plane: bad dimensions");
    Rng rng(seed);
    SpectralField f(width, height);
    const double mag = std::sqrt(static_cast<double>(width) * height);
    // Fill Hermitian pairs: bin (k,l) pairs with (-k mod M, -l mod N).
    for (int l = 0; l < height; ++l) {
        for (int k = 0; k < width; ++k) {
            const int kc = (width - k) % width;
            const int lc = (height - l) % height;
            if (std::make_pair(l, k) > std::make_pair(lc, kc)) continue;  // partner fills it
            if (k == kc && l == lc) {
                // Self-conjugate bin must be real; DC positive for determinism.
                const double s = (k == 0 && l == 0) ? 1.0 : (rng.next_bool() ? 1.0 : -1.0);
                f.at(k, l) = {mag * s, 0.0};
            } else {
                const double phi = 2.0 * std::numbers::pi * rng.next_double();
                f.at(k, l) = {mag * std::cos(phi), mag * std::sin(phi)};
                f.at(kc, lc) = std::conj(f.at(k, l));
            }
        }
    }
    return idft2(f, 1e-6);
}

EmbedResult embed_additive(const Image& img, const AdditivePattern& wm) {
    validate(img, "embed_additive");
    if (img.width != wm.width || img.height != wm.height)
        fail(ErrorCategory::Geometry,
             "embed_additive: pattern is " + std::to_string(wm.width) + "x" +
                 std::to_string(wm.height) + " but image is " +
                 std::to_string(img.width) + "x" + std::to_string(img.height));
    EmbedResult res;
    if (wm.alpha == 0.0) {
        res.image = img;
        return res;
    }
    auto y = luma_plane(img);
    for (size_t i = 0; i < y.size(); ++i) y[i] += wm.alpha * wm.w[i];
    res.image = img;
    set_luma_plane(res.image, y);
    res.clamped_fraction = clamp01(res.image);
    return res;
}

namespace {

// 3x3 box blur with mirror padding, then residual = plane - blurred.
std::vector<double> highpass(std::span<const double> plane, int w, int h) {
    std::vector<double> out(plane.size());
    auto px = [&](int y, int x) {
        if (x < 0) x = -x - 1;
        if (x >= w) x = 2 * w - 1 - x;
        if (y < 0) y = -y - 1;
        if (y >= h) y = 2 * h - 1 - y;
        return plane[static_cast<size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) s += px(y + dy, x + dx);
            out[static_cast<size_t>(y) * w + x] =
                plane[static_cast<size_t>(y) * w + x] - s / 9.0;
        }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

DetectionResult detect_additive(const Image& img, const AdditivePattern& wm,
                                const Image* original, double tau) {
    validate(img, "detect_additive");
    if (img.width != wm.width || img.height != wm.height)
        fail(ErrorCategory::Geometry, "detect_additive: dimension mismatch");
    std::vector<double> r;
    if (original) {
        require_same_geometry(img, *original, "detect_additive");
        auto y = luma_plane(img);
        auto y0 = luma_plane(*original);
        r.resize(y.size());
        double mean = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
            r[i] = y[i] - y0[i];
            mean += r[i];
        }
        // Centering makes informed detection invariant to constant shifts.
        mean /= static_cast<double>(r.size());
        for (double& v : r) v -= mean;
    } else {
        auto y = luma_plane(img);
        r = highpass(y, img.width, img.height);
    }
    DetectionResult det;
    det.threshold = tau;
    const double denom = norm(r) * norm(wm.w);
    det.correlation = denom > 0 ? dot(r, wm.w) / denom : 0.0;
    det.decision = det.correlation >= tau;
    det.bits.resize(wm.payload.size());
    int correct = 0;
    for (size_t i = 0; i < wm.payload.size(); ++i) {
        det.bits[i] = dot(r, wm.bit_fields[i]) >= 0.0 ? 1 : 0;
        correct += det.bits[i] == wm.payload[i];
    }
    det.bit_accuracy = static_cast<double>(correct) / static_cast<double>(wm.payload.size());
    return det;
}

// --- spread spectrum ----------------------------------------------------------

namespace {

constexpr uint64_t kShuffleTag = 0x5107511075110751ull;
constexpr uint64_t kSignTag = 0x51c7451c7451c745ull;

struct Carrier {
    int block = 0;  // index into full-block list
    int slot = 0;   // index into band slot list
};

struct SsLayout {
    std::vector<std::pair<int, int>> band;     // (u, v) slots, fixed order
    std::vector<int> full_blocks;              // block indices (by*bx grid)
    std::vector<Carrier> chips;                // chips[bit*cpb + c]
    std::vector<int8_t> signs;                 // same indexing
};

void check_key(const SpreadSpectrumKey& key) {
    if (key.payload.empty())
        fail(ErrorCategory::Config, "spread-spectrum key: empty payload");
    if (key.gamma < 0)
        fail(ErrorCategory::Config, "spread-spectrum key: gamma must be >= 0");
    if (key.chips_per_bit < 1)
        fail(ErrorCategory::Config, "spread-spectrum key: chips_per_bit must be >= 1");
    if (key.band_lo < 1 || key.band_hi > 14 || key.band_lo > key.band_hi)
        fail(ErrorCategory::Config,
             "spread-spectrum key: band must satisfy 1 <= lo <= hi <= 14");
}

std::vector<std::pair<int, int>> band_slots(const SpreadSpectrumKey& key) {
    std::vector<std::pair<int, int>> slots;
    for (int s = key.band_lo; s <= key.band_hi; ++s)
        for (int u = std::max(0, s - 7); u <= std::min(7, s); ++u)
            slots.emplace_back(u, s - u);
    return slots;
}

SsLayout make_layout(const SpreadSpectrumKey& key, const BlockPlane& bp) {
    SsLayout lay;
    lay.band = band_slots(key);
    for (int by = 0; by < bp.blocks_y; ++by)
        for (int bx = 0; bx < bp.blocks_x; ++bx)
            if (block_is_full(bp, bx, by))
                lay.full_blocks.push_back(by * bp.blocks_x + bx);
    const size_t nbits = key.payload.size();
    const size_t need = nbits * static_cast<size_t>(key.chips_per_bit);
    const size_t avail = lay.full_blocks.size() * lay.band.size();
    if (need > avail)
        fail(ErrorCategory::Capacity,
             "spread-spectrum capacity: need " + std::to_string(need) +
                 " chips (" + std::to_string(nbits) + " bits x " +
                 std::to_string(key.chips_per_bit) + " chips/bit) but only " +
                 std::to_string(avail) + " mid-band slots available (" +
                 std::to_string(lay.full_blocks.size()) + " full blocks x " +
                 std::to_string(lay.band.size()) + " band slots)");
    // Seeded Fisher-Yates over all (block, slot) pairs; first `need` become
    // chips. Disjointness across bits holds by construction.
    std::vector<Carrier> all(avail);
    size_t idx = 0;
    for (size_t b = 0; b < lay.full_blocks.size(); ++b)
        for (size_t s = 0; s < lay.band.size(); ++s)
            all[idx++] = Carrier{static_cast<int>(b), static_cast<int>(s)};
    Rng shuffle_rng(derive_seed(key.seed, kShuffleTag));
    for (size_t i = avail - 1; i > 0; --i) {
        const size_t j = shuffle_rng.next_below(i + 1);
        std::swap(all[i], all[j]);
    }
    lay.chips.assign(all.begin(), all.begin() + static_cast<ptrdiff_t>(need));
    Rng sign_rng(derive_seed(key.seed, kSignTag));
    lay.signs.resize(need);
    for (auto& s : lay.signs) s = sign_rng.next_bool() ? 1 : -1;
    return lay;
}

}  // namespace

int ss_band_slots(const SpreadSpectrumKey& key) {
    // Only the band matters here; callers use this to size a payload, so the
    // payload itself may still be empty.
    if (key.band_lo < 1 || key.band_hi > 14 || key.band_lo > key.band_hi)
        fail(ErrorCategory::Config,
             "spread-spectrum key: band must satisfy 1 <= lo <= hi <= 14");
    return static_cast<int>(band_slots(key).size());
}

EmbedResult embed_ss(const Image& img, const SpreadSpectrumKey& key) {
    validate(img, "embed_ss");
    check_key(key);
    auto y = luma_plane(img);
    BlockPlane bp = split_blocks(y, img.width, img.height);
    SsLayout lay = make_layout(key, bp);
    EmbedResult res;
    if (key.gamma == 0.0) {
        res.image = img;
        return res;
    }
    // Delta formulation: inverse-transform the chip-only coefficient field and
    // add it to the luma plane, so untouched coefficients are exactly untouched.
    const double g = key.gamma / 255.0;
    std::vector<std::array<double, 64>> delta(lay.full_blocks.size());
    for (auto& d : delta) d.fill(0.0);
    const int cpb = key.chips_per_bit;
    for (size_t i = 0; i < key.payload.size(); ++i) {
        const double bit_sign = key.payload[i] ? 1.0 : -1.0;
        for (int c = 0; c < cpb; ++c) {
            const size_t chip = i * static_cast<size_t>(cpb) + static_cast<size_t>(c);
            const auto [u, v] = lay.band[static_cast<size_t>(lay.chips[chip].slot)];
            delta[static_cast<size_t>(lay.chips[chip].block)][v * 8 + u] +=
                g * bit_sign * static_cast<double>(lay.signs[chip]);
        }
    }
    std::array<double, 64> spatial;
    for (size_t b = 0; b < delta.size(); ++b) {
        dct8x8_inverse(delta[b], spatial);
        const int blk = lay.full_blocks[b];
        const int bx = blk % bp.blocks_x, by = blk / bp.blocks_x;
        for (int yy = 0; yy < 8; ++yy)
            for (int xx = 0; xx < 8; ++xx)
                y[static_cast<size_t>(by * 8 + yy) * img.width + bx * 8 + xx] +=
                    spatial[yy * 8 + xx];
    }
    res.image = img;
    set_luma_plane(res.image, y);
    res.clamped_fraction = clamp01(res.image);
    return res;
}

DetectionResult extract_ss(const Image& img, const SpreadSpectrumKey& key) {
    validate(img, "extract_ss");
    check_key(key);
    auto y = luma_plane(img);
    BlockPlane bp = split_blocks(y, img.width, img.height);
    SsLayout lay = make_layout(key, bp);
    // Transform only the blocks that carry chips.
    std::vector<std::array<double, 64>> coefs(lay.full_blocks.size());
    std::vector<bool> have(lay.full_blocks.size(), false);
    auto coef_at = [&](const Carrier& c) -> double {
        const size_t b = static_cast<size_t>(c.block);
        if (!have[b]) {
            const int blk = lay.full_blocks[b];
            dct8x8_forward(bp.blocks[static_cast<size_t>(blk)], coefs[b]);
            have[b] = true;
        }
        const auto [u, v] = lay.band[static_cast<size_t>(c.slot)];
        return coefs[b][v * 8 + u];
    };
    DetectionResult det;
    det.threshold = key.tau;
    det.bits.resize(key.payload.size());
    const int cpb = key.chips_per_bit;
    int correct = 0;
    double corr_num = 0.0, coef_ss = 0.0;
    for (size_t i = 0; i < key.payload.size(); ++i) {
        double stat = 0.0;
        for (int c = 0; c < cpb; ++c) {
            const size_t chip = i * static_cast<size_t>(cpb) + static_cast<size_t>(c);
            const double cv = coef_at(lay.chips[chip]);
            stat += static_cast<double>(lay.signs[chip]) * cv;
            corr_num += static_cast<double>(lay.signs[chip]) *
                        (key.payload[i] ? 1.0 : -1.0) * cv;
            coef_ss += cv * cv;
        }
        det.bits[i] = stat >= 0.0 ? 1 : 0;
        correct += det.bits[i] == key.payload[i];
    }
    const size_t nchips = key.payload.size() * static_cast<size_t>(cpb);
    const double denom = std::sqrt(coef_ss) * std::sqrt(static_cast<double>(nchips));
    det.correlation = denom > 0 ? corr_num / denom : 0.0;
    det.bit_accuracy =
        static_cast<double>(correct) / static_cast<double>(key.payload.size());
    det.decision = det.bit_accuracy >= key.tau;
    return det;
}

double residual_watermark_energy(const Image& candidate,
                                 const AdditivePattern& wm,
                                 const Image* original) {
    const auto det = detect_additive(candidate, wm, original);
    return det.correlation * det.correlation;
}

double residual_watermark_energy(const Image& candidate,
                                 const SpreadSpectrumKey& key) {
    const auto det = extract_ss(candidate, key);
    return det.correlation * det.correlation;
}

// --- key persistence ----------------------------------------------------------

std::string serialize_key(const WatermarkKey& key) {
    std::ostringstream out;
    out << "wmkey v1\n";
    if (std::holds_alternative<AdditiveKeySpec>(key)) {
        const auto& k = std::get<AdditiveKeySpec>(key);
        out << "type additive\n";
        out << "seed " << k.seed << "\n";
        out << "alpha " << k.alpha << "\n";
        out << "width " << k.width << "\n";
        out << "height " << k.height << "\n";
        out << "payload_bits " << k.payload.size() << "\n";
        out << "payload_hex " << payload_to_hex(k.payload) << "\n";
    } else {
        const auto& k = std::get<SpreadSpectrumKey>(key);
        out << "type ss\n";
        out << "seed " << k.seed << "\n";
        out << "gamma " << k.gamma << "\n";
        out << "band " << k.band_lo << " " << k.band_hi << "\n";
        out << "chips_per_bit " << k.chips_per_bit << "\n";
        out << "tau " << k.tau << "\n";
        out << "payload_bits " << k.payload.size() << "\n";
        out << "payload_hex " << payload_to_hex(k.payload) << "\n";
    }
    return out.str();
}

WatermarkKey parse_key(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "wmkey v1")
        fail(ErrorCategory::Config, "key file: missing 'wmkey v1' header");
    std::string type, payload_hex;
    int payload_bits = 0;
    AdditiveKeySpec add;
    SpreadSpectrumKey ss;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k == "type") ls >> type;
        else if (k == "seed") { uint64_t s; ls >> s; add.seed = ss.seed = s; }
        else if (k == "alpha") ls >> add.alpha;
        else if (k == "width") ls >> add.width;
        else if (k == "height") ls >> add.height;
        else if (k == "gamma") ls >> ss.gamma;
        else if (k == "band") ls >> ss.band_lo >> ss.band_hi;
        else if (k == "chips_per_bit") ls >> ss.chips_per_bit;
        else if (k == "tau") ls >> ss.tau;
        else if (k == "payload_bits") ls >> payload_bits;
        else if (k == "payload_hex") ls >> payload_hex;
        else fail(ErrorCategory::Config, "key file: unknown field '" + k + "'");
        if (ls.fail())
            fail(ErrorCategory::Config, "key file: malformed line '" + line + "'");
    }
    if (payload_bits < 1)
        fail(ErrorCategory::Config, "key file: missing payload_bits");
    auto payload = payload_from_hex(payload_hex, payload_bits);
    if (type == "additive") {
        if (add.width < 1 || add.height < 1)
            fail(ErrorCategory::Config, "key file: additive key needs width/height");
        add.payload = std::move(payload);
        return add;
    }
    if (type == "ss") {
        ss.payload = std::move(payload);
        return ss;
    }
    fail(ErrorCategory::Config, "key file: unknown type '" + type + "'");
}

void save_key(const WatermarkKey& key, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCategory::Io, path + ": cannot open for writing");
    out << serialize_key(key);
    if (!out) fail(ErrorCategory::Io, path + ": write failed");
}

WatermarkKey load_key(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::Io, path + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key(ss.str());
}

}  // namespace wmb
