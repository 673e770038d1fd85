#include "wmbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "wmbench/degrade.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/rng.hpp"
#include "wmbench/svg.hpp"

namespace wmb {
namespace {

constexpr uint64_t kEmbedStream = 0x656d626564ull;
constexpr uint64_t kPayloadStream = 0x7061796c6full;
constexpr uint64_t kAttackStream = 0x61747461636bull;
constexpr uint64_t kMixShuffleStream = 0x6d697873686600ull;

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

// Runs fn(0..n-1) on up to `workers` threads; results must go into
// preallocated per-index slots so reductions stay order-independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto body = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

int ceil_count(double p, int n) {
    double v = p * n;
    double r = std::round(v);
    if (std::abs(v - r) < 1e-9) return static_cast<int>(r);
    return static_cast<int>(std::ceil(v));
}

struct ImageKey {
    uint64_t seed = 0;
    std::vector<uint8_t> payload;
};

ImageKey make_image_key(const ExperimentConfig& cfg, const CodecSpec& spec,
                        int codec_index, int image_index) {
    ImageKey k;
    k.seed = derive_seed(derive_seed(derive_seed(cfg.seed, kEmbedStream),
                                     static_cast<uint64_t>(codec_index)),
                         static_cast<uint64_t>(image_index));
    k.payload = random_payload(spec.payload_bits, derive_seed(k.seed, kPayloadStream));
    return k;
}

SpreadSpectrumKey ss_key(const CodecSpec& c, const ImageKey& k) {
    SpreadSpectrumKey key;
    key.seed = k.seed;
    key.payload = k.payload;
    key.gamma = c.gamma;
    key.band_lo = c.band_lo;
    key.band_hi = c.band_hi;
    key.chips_per_bit = c.chips_per_bit;
    key.tau = c.tau;
    return key;
}

EmbedResult codec_embed(const CodecSpec& c, const Image& img, const ImageKey& k) {
    if (c.kind == CodecSpec::Kind::SpreadSpectrum) return embed_ss(img, ss_key(c, k));
    AdditivePattern wm = make_additive_pattern(img.width, img.height, k.seed, k.payload, c.alpha);
    return embed_additive(img, wm);
}

DetectionResult codec_detect(const CodecSpec& c, const Image& img, const ImageKey& k) {
    if (c.kind == CodecSpec::Kind::SpreadSpectrum) return extract_ss(img, ss_key(c, k));
    AdditivePattern wm = make_additive_pattern(img.width, img.height, k.seed, k.payload, c.alpha);
    return detect_additive(img, wm, nullptr, c.tau_corr);
}

double codec_residual(const CodecSpec& c, const Image& img, const ImageKey& k) {
    if (c.kind == CodecSpec::Kind::SpreadSpectrum)
        return residual_watermark_energy(img, ss_key(c, k));
    AdditivePattern wm = make_additive_pattern(img.width, img.height, k.seed, k.payload, c.alpha);
    return residual_watermark_energy(img, wm, nullptr);
}

// Mean of vals[i] where mask[i], honoring the aggregation policy. "micro"
// pools every image; "macro" averages per-dataset means (datasets with no
// selected image are skipped). Empty selection -> NaN.
double aggregate(const std::vector<double>& vals, const std::vector<int>& dataset_of,
                 const std::vector<char>& mask, int n_datasets, const std::string& mode) {
    if (mode == "micro") {
        double sum = 0.0;
        int n = 0;
        for (size_t i = 0; i < vals.size(); ++i)
            if (mask[i]) {
                sum += vals[i];
                ++n;
            }
        return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
    }
    double outer = 0.0;
    int groups = 0;
    for (int d = 0; d < n_datasets; ++d) {
        double sum = 0.0;
        int n = 0;
        for (size_t i = 0; i < vals.size(); ++i)
            if (mask[i] && dataset_of[i] == d) {
                sum += vals[i];
                ++n;
            }
        if (n > 0) {
            outer += sum / n;
            ++groups;
        }
    }
    return groups == 0 ? std::numeric_limits<double>::quiet_NaN() : outer / groups;
}

struct Pool {
    std::vector<Image> images;
    std::vector<int> dataset_of;
    int n_datasets = 0;
};

Pool build_pool(const std::vector<Dataset>& data) {
    Pool pool;
    pool.n_datasets = static_cast<int>(data.size());
    for (size_t d = 0; d < data.size(); ++d) {
        for (const Image& img : data[d].images) {
            pool.images.push_back(img);
            pool.dataset_of.push_back(static_cast<int>(d));
        }
    }
    if (pool.images.empty())
        fail(ErrorCategory::Config, "experiment needs at least one dataset image");
    return pool;
}

// Fits one PCA codec per distinct latent dimension requested by the attack
// stages, always on the clean pooled dataset.
std::map<int, LatentCodec> fit_latent_codecs(const std::vector<AttackPipeline>& attacks,
                                             const std::vector<Image>& clean) {
    std::set<int> dims;
    for (const AttackPipeline& pipe : attacks)
        for (const Stage& st : pipe.stages)
            if (const auto* ls = std::get_if<LatentStage>(&st)) dims.insert(ls->d);
    std::map<int, LatentCodec> out;
    for (int d : dims) out.emplace(d, fit_latent_codec(clean, d));
    return out;
}

const LatentCodec* latent_for(const std::map<int, LatentCodec>& codecs,
                              const AttackPipeline& pipe) {
    for (const Stage& st : pipe.stages)
        if (const auto* ls = std::get_if<LatentStage>(&st)) {
            auto it = codecs.find(ls->d);
            return it == codecs.end() ? nullptr : &it->second;
        }
    return nullptr;
}

std::string csv_cell(double v) {
    if (std::isnan(v)) return "";
    return format_num(v);
}

std::string sanitize_label(const std::string& label) {
    std::string out;
    for (char c : label) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            out.push_back('_');
    }
    return out.empty() ? "codec" : out;
}

const char* kSubstitutionNote =
    "codec axis substitutes for the fine-tuning-method axis: desk-scale "
    "classical codecs stand in for per-method diffusion columns";

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCategory::Io, "cannot write '" + path + "'");
    out << body;
    if (!out) fail(ErrorCategory::Io, "write failed for '" + path + "'");
}

}  // namespace

std::vector<CodecSpec> default_codecs() {
    CodecSpec ss;
    ss.kind = CodecSpec::Kind::SpreadSpectrum;
    ss.label = "ss";
    CodecSpec add;
    add.kind = CodecSpec::Kind::Additive;
    add.label = "additive";
    return {ss, add};
}

std::vector<AttackPipeline> default_grid_attacks() {
    std::vector<AttackPipeline> out = distortion_pipelines();
    for (AttackPipeline& p : builtin_pipelines()) out.push_back(std::move(p));
    return out;
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "version " << kToolkitVersion << "\n";
    out << "datasets";
    for (const std::string& d : cfg.datasets) out << " " << d;
    out << "\n";
    out << "seed " << cfg.seed << "\n";
    out << "workers " << cfg.workers << "\n";
    out << "resize " << cfg.resize_w << "x" << cfg.resize_h << "\n";
    out << "aggregation " << cfg.aggregation << "\n";
    out << "quality_metrics " << (cfg.quality_metrics ? 1 : 0) << "\n";
    out << "formats";
    for (const std::string& f : cfg.formats) out << " " << f;
    out << "\n";
    for (const CodecSpec& c : cfg.codecs) {
        out << "codec " << c.label << " ";
        if (c.kind == CodecSpec::Kind::SpreadSpectrum) {
            out << "ss gamma=" << format_num(c.gamma) << " bits=" << c.payload_bits
                << " chips=" << c.chips_per_bit << " band=" << c.band_lo << ".." << c.band_hi
                << " tau=" << format_num(c.tau);
        } else {
            out << "additive alpha=" << format_num(c.alpha) << " bits=" << c.payload_bits
                << " tau=" << format_num(c.tau_corr);
        }
        out << "\n";
    }
    for (const AttackPipeline& a : cfg.attacks) {
        out << "attack " << a.name;
        for (const Stage& st : a.stages) {
            out << " [" << stage_kind(st);
            if (const auto* s = std::get_if<NoiseStage>(&st)) {
                out << " sigma=" << format_num(s->sigma);
            } else if (const auto* s = std::get_if<BlurStage>(&st)) {
                out << " sigma=" << format_num(s->p.sigma) << " k=" << s->p.kernel_size
                    << " mode=" << (s->p.mode == BlurMode::Periodic ? "periodic" : "mirror");
            } else if (const auto* s = std::get_if<JpegStage>(&st)) {
                out << " quality=" << s->quality;
            } else if (const auto* s = std::get_if<LatentStage>(&st)) {
                out << " sigma=" << format_num(s->sigma) << " d=" << s->d;
            } else if (const auto* s = std::get_if<TikhonovStage>(&st)) {
                out << " beta=" << format_num(s->beta);
            } else if (const auto* s = std::get_if<TvStage>(&st)) {
                out << " beta=" << format_num(s->beta) << " iters=" << s->max_iters
                    << " tol=" << format_num(s->tol);
            } else if (const auto* s = std::get_if<WienerStage>(&st)) {
                out << " sigma=" << format_num(s->blur.sigma) << " k=" << s->blur.kernel_size
                    << " mode=" << (s->blur.mode == BlurMode::Periodic ? "periodic" : "mirror")
                    << " nsr=" << format_num(s->nsr);
            }
            out << "]";
        }
        out << "\n";
    }
    out << "mix codec=" << cfg.mix.codec_index << " attack="
        << (cfg.mix.attack.empty() ? "identity" : cfg.mix.attack) << " ratios=";
    for (size_t i = 0; i < cfg.mix.ratios.size(); ++i)
        out << (i ? "," : "") << format_num(cfg.mix.ratios[i]);
    out << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// config schema

namespace {

CodecSpec parse_codec_table(const ConfigTable& t, const std::string& ctx) {
    TableView v(t, ctx);
    v.reject_unknown({"type", "label", "payload_bits", "gamma", "chips_per_bit", "band",
                      "tau", "alpha"});
    CodecSpec c;
    std::string type = v.require_string("type");
    if (type == "ss" || type == "spread-spectrum") {
        c.kind = CodecSpec::Kind::SpreadSpectrum;
    } else if (type == "additive") {
        c.kind = CodecSpec::Kind::Additive;
    } else {
        fail(ErrorCategory::Config, ctx + ": unknown codec type '" + type +
                                        "' (expected 'ss' or 'additive')");
    }
    c.label = v.get_string("label", type == "spread-spectrum" ? "ss" : type);
    c.payload_bits = static_cast<int>(v.get_int("payload_bits", c.payload_bits));
    if (c.payload_bits <= 0 || c.payload_bits > 4096)
        fail(ErrorCategory::Config, ctx + ": payload_bits must be in [1, 4096]");
    if (c.kind == CodecSpec::Kind::SpreadSpectrum) {
        c.gamma = v.get_number("gamma", c.gamma);
        c.chips_per_bit = static_cast<int>(v.get_int("chips_per_bit", c.chips_per_bit));
        std::vector<double> band = v.get_number_array("band");
        if (!band.empty()) {
            if (band.size() != 2)
                fail(ErrorCategory::Config, ctx + ": band must be [lo, hi]");
            c.band_lo = static_cast<int>(band[0]);
            c.band_hi = static_cast<int>(band[1]);
        }
        c.tau = v.get_number("tau", c.tau);
        if (v.has("alpha"))
            fail(ErrorCategory::Config, ctx + ": 'alpha' applies to the additive codec only");
    } else {
        c.alpha = v.get_number("alpha", c.alpha);
        c.tau_corr = v.get_number("tau", c.tau_corr);
        if (v.has("gamma") || v.has("chips_per_bit") || v.has("band"))
            fail(ErrorCategory::Config,
                 ctx + ": gamma/chips_per_bit/band apply to the spread-spectrum codec only");
    }
    return c;
}

Stage parse_stage_table(const ConfigTable& t, const std::string& ctx) {
    TableView v(t, ctx);
    std::string kind = v.require_string("kind");
    if (kind == "noise") {
        v.reject_unknown({"kind", "sigma"});
        NoiseStage s;
        s.sigma = v.get_number("sigma", s.sigma);
        return s;
    }
    if (kind == "blur") {
        v.reject_unknown({"kind", "sigma", "kernel_size", "mode"});
        BlurStage s;
        s.p.sigma = v.get_number("sigma", s.p.sigma);
        s.p.kernel_size = static_cast<int>(v.get_int("kernel_size", s.p.kernel_size));
        std::string mode = v.get_string("mode", "mirror");
        if (mode == "mirror") s.p.mode = BlurMode::Mirror;
        else if (mode == "periodic") s.p.mode = BlurMode::Periodic;
        else fail(ErrorCategory::Config, ctx + ": blur mode must be 'mirror' or 'periodic'");
        return s;
    }
    if (kind == "jpeg") {
        v.reject_unknown({"kind", "quality"});
        JpegStage s;
        s.quality = static_cast<int>(v.get_int("quality", s.quality));
        return s;
    }
    if (kind == "latent") {
        v.reject_unknown({"kind", "sigma", "d"});
        LatentStage s;
        s.sigma = v.get_number("sigma", s.sigma);
        s.d = static_cast<int>(v.get_int("d", s.d));
        return s;
    }
    if (kind == "tikhonov") {
        v.reject_unknown({"kind", "beta"});
        TikhonovStage s;
        s.beta = v.get_number("beta", s.beta);
        return s;
    }
    if (kind == "tv") {
        v.reject_unknown({"kind", "beta", "max_iters", "tol"});
        TvStage s;
        s.beta = v.get_number("beta", s.beta);
        s.max_iters = static_cast<int>(v.get_int("max_iters", s.max_iters));
        s.tol = v.get_number("tol", s.tol);
        return s;
    }
    if (kind == "wiener") {
        v.reject_unknown({"kind", "sigma", "kernel_size", "mode", "nsr"});
        WienerStage s;
        s.blur.sigma = v.get_number("sigma", s.blur.sigma);
        s.blur.kernel_size = static_cast<int>(v.get_int("kernel_size", s.blur.kernel_size));
        std::string mode = v.get_string("mode", "periodic");
        if (mode == "mirror") s.blur.mode = BlurMode::Mirror;
        else if (mode == "periodic") s.blur.mode = BlurMode::Periodic;
        else fail(ErrorCategory::Config, ctx + ": wiener mode must be 'mirror' or 'periodic'");
        s.nsr = v.get_number("nsr", s.nsr);
        return s;
    }
    fail(ErrorCategory::Config,
         ctx + ": unknown stage kind '" + kind +
             "' (expected noise|blur|jpeg|latent|tikhonov|tv|wiener)");
}

AttackPipeline parse_attack_table(const ConfigTable& t, const std::string& ctx) {
    TableView v(t, ctx);
    v.reject_unknown({"builtin", "name", "stage"});
    if (v.has("builtin")) {
        std::string name = v.require_string("builtin");
        if (!v.table_array("stage").empty() || v.has("name"))
            fail(ErrorCategory::Config,
                 ctx + ": 'builtin' cannot be combined with 'name' or stages");
        return named_pipeline(name);
    }
    AttackPipeline pipe;
    pipe.name = v.require_string("name");
    if (pipe.name.empty()) fail(ErrorCategory::Config, ctx + ": attack name must be non-empty");
    auto stages = v.table_array("stage");
    if (stages.empty())
        fail(ErrorCategory::Config, ctx + ": attack '" + pipe.name + "' needs at least one [[attack.stage]]");
    for (size_t i = 0; i < stages.size(); ++i)
        pipe.stages.push_back(
            parse_stage_table(*stages[i], ctx + ".stage[" + std::to_string(i) + "]"));
    return pipe;
}

}  // namespace

ExperimentConfig parse_experiment_config(const ConfigTable& root, const std::string& origin) {
    TableView v(root, origin);
    v.reject_unknown({"dataset", "out", "seed", "workers", "resize", "formats", "aggregation",
                      "quality_metrics", "codec", "attack", "mix"});
    ExperimentConfig cfg;

    if (v.has("dataset")) {
        // accept a single path or an array of paths
        const ConfigTable& t = root;
        auto it = t.values.find("dataset");
        if (it->second.is_string()) {
            cfg.datasets = {std::get<std::string>(it->second.v)};
        } else {
            cfg.datasets = v.get_string_array("dataset");
        }
    }
    cfg.out_dir = v.get_string("out", cfg.out_dir);
    cfg.seed = v.get_u64("seed", cfg.seed);
    cfg.workers = static_cast<int>(v.get_int("workers", cfg.workers));
    if (cfg.workers < 1) fail(ErrorCategory::Config, origin + ": workers must be >= 1");
    std::vector<double> resize = v.get_number_array("resize");
    if (!resize.empty()) {
        if (resize.size() != 2)
            fail(ErrorCategory::Config, origin + ": resize must be [width, height]");
        cfg.resize_w = static_cast<int>(resize[0]);
        cfg.resize_h = static_cast<int>(resize[1]);
        if (cfg.resize_w <= 0 || cfg.resize_h <= 0)
            fail(ErrorCategory::Config, origin + ": resize dimensions must be positive");
    }
    if (v.has("formats")) {
        cfg.formats = v.get_string_array("formats");
        for (const std::string& f : cfg.formats)
            if (f != "csv" && f != "md" && f != "svg")
                fail(ErrorCategory::Config, origin + ": unknown format '" + f + "'");
        if (cfg.formats.empty())
            fail(ErrorCategory::Config, origin + ": formats must not be empty");
    }
    cfg.aggregation = v.get_string("aggregation", cfg.aggregation);
    if (cfg.aggregation != "micro" && cfg.aggregation != "macro")
        fail(ErrorCategory::Config, origin + ": aggregation must be 'micro' or 'macro'");
    cfg.quality_metrics = v.get_bool("quality_metrics", cfg.quality_metrics);

    auto codec_tables = v.table_array("codec");
    for (size_t i = 0; i < codec_tables.size(); ++i)
        cfg.codecs.push_back(
            parse_codec_table(*codec_tables[i], origin + ".codec[" + std::to_string(i) + "]"));
    if (cfg.codecs.empty()) cfg.codecs = default_codecs();
    // de-duplicate labels so report rows stay unambiguous
    for (size_t i = 0; i < cfg.codecs.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (cfg.codecs[i].label == cfg.codecs[j].label)
                cfg.codecs[i].label += "-" + std::to_string(i);

    auto attack_tables = v.table_array("attack");
    for (size_t i = 0; i < attack_tables.size(); ++i)
        cfg.attacks.push_back(
            parse_attack_table(*attack_tables[i], origin + ".attack[" + std::to_string(i) + "]"));
    if (cfg.attacks.empty()) cfg.attacks = default_grid_attacks();
    for (size_t i = 0; i < cfg.attacks.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (cfg.attacks[i].name == cfg.attacks[j].name)
                fail(ErrorCategory::Config,
                     origin + ": duplicate attack name '" + cfg.attacks[i].name + "'");

    if (const ConfigTable* mt = v.table("mix")) {
        TableView mv(*mt, origin + ".mix");
        mv.reject_unknown({"ratios", "codec", "attack"});
        std::vector<double> ratios = mv.get_number_array("ratios");
        if (!ratios.empty()) cfg.mix.ratios = ratios;
        cfg.mix.codec_index = static_cast<int>(mv.get_int("codec", cfg.mix.codec_index));
        cfg.mix.attack = mv.get_string("attack", cfg.mix.attack);
    }
    for (double p : cfg.mix.ratios)
        if (!(p > 0.0 && p <= 1.0))
            fail(ErrorCategory::Config, origin + ": mix ratios must lie in (0, 1]");
    if (cfg.mix.codec_index < 0 ||
        cfg.mix.codec_index >= static_cast<int>(cfg.codecs.size()))
        fail(ErrorCategory::Config, origin + ": mix codec index out of range");
    if (!cfg.mix.attack.empty()) {
        bool found = false;
        for (const AttackPipeline& a : cfg.attacks)
            if (a.name == cfg.mix.attack) found = true;
        if (!found) named_pipeline(cfg.mix.attack);  // raises Config error if unknown
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(load_config_file(path), path);
}

// ---------------------------------------------------------------------------
// dataset ingestion

Dataset ingest_dataset(const std::string& dir, int resize_w, int resize_h,
                       std::vector<std::string>* warnings) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        fail(ErrorCategory::Io, "dataset path '" + dir + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm")
            files.push_back(entry.path().string());
    }
    if (ec) fail(ErrorCategory::Io, "cannot list dataset directory '" + dir + "': " + ec.message());
    std::sort(files.begin(), files.end());

    Dataset ds;
    ds.name = fs::path(dir).filename().string();
    if (ds.name.empty()) ds.name = dir;
    for (const std::string& path : files) {
        try {
            Image img = load_image(path);
            if (resize_w > 0 && resize_h > 0) img = center_crop_resize(img, resize_w, resize_h);
            ds.images.push_back(std::move(img));
            ds.image_names.push_back(fs::path(path).filename().string());
        } catch (const Error& e) {
            if (warnings)
                warnings->push_back("skipping '" + path + "': " + e.what());
        }
    }
    if (ds.images.empty())
        fail(ErrorCategory::Io, "no valid images in dataset directory '" + dir + "'");
    return ds;
}

std::vector<Dataset> ingest_datasets(const ExperimentConfig& cfg,
                                     std::vector<std::string>* warnings) {
    if (cfg.datasets.empty())
        fail(ErrorCategory::Config, "config sets no dataset directory");
    std::vector<Dataset> out;
    for (const std::string& dir : cfg.datasets)
        out.push_back(ingest_dataset(dir, cfg.resize_w, cfg.resize_h, warnings));
    return out;
}

// ---------------------------------------------------------------------------
// experiments

ExperimentReport run_robustness_grid(const ExperimentConfig& cfg,
                                     const std::vector<Dataset>& data) {
    Pool pool = build_pool(data);
    const int n = static_cast<int>(pool.images.size());
    if (cfg.codecs.empty()) fail(ErrorCategory::Config, "grid needs at least one codec");
    if (cfg.attacks.empty()) fail(ErrorCategory::Config, "grid needs at least one attack");

    ExperimentReport rep;
    rep.kind = "grid";
    rep.seed = cfg.seed;
    rep.aggregation = cfg.aggregation;
    rep.n_images = n;
    rep.config_hash = [&] {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canonical_config_text(cfg))));
        return std::string(buf);
    }();
    rep.notes.push_back(kSubstitutionNote);

    const double t_begin = now_ms();
    std::map<int, LatentCodec> latents = fit_latent_codecs(cfg.attacks, pool.images);
    const std::vector<char> all_mask(n, 1);

    for (size_t k = 0; k < cfg.codecs.size(); ++k) {
        const CodecSpec& spec = cfg.codecs[k];
        std::vector<ImageKey> keys(n);
        std::vector<Image> marked(n);
        std::vector<double> clamped(n, 0.0);
        parallel_for(n, cfg.workers, [&](int i) {
            keys[i] = make_image_key(cfg, spec, static_cast<int>(k), i);
            EmbedResult er = codec_embed(spec, pool.images[i], keys[i]);
            marked[i] = std::move(er.image);
            clamped[i] = er.clamped_fraction;
        });

        for (size_t c = 0; c < cfg.attacks.size(); ++c) {
            const AttackPipeline& base = cfg.attacks[c];
            const LatentCodec* latent = latent_for(latents, base);
            std::vector<double> acc(n, 0.0), psnr_v(n, 0.0), ssim_v(n, 0.0), resid(n, 0.0);
            const double t0 = now_ms();
            parallel_for(n, cfg.workers, [&](int i) {
                AttackPipeline pipe = base;
                pipe.seed = derive_seed(
                    derive_seed(derive_seed(derive_seed(cfg.seed, kAttackStream),
                                            static_cast<uint64_t>(k)),
                                static_cast<uint64_t>(c)),
                    static_cast<uint64_t>(i));
                Image attacked = run_attack(marked[i], pipe, latent);
                acc[i] = codec_detect(spec, attacked, keys[i]).bit_accuracy;
                if (cfg.quality_metrics) {
                    psnr_v[i] = psnr(attacked, pool.images[i]);
                    ssim_v[i] = ssim(attacked, pool.images[i]);
                }
                resid[i] = codec_residual(spec, attacked, keys[i]);
            });
            ReportRow row;
            row.codec = spec.label;
            row.attack = base.name;
            row.ratio = 1.0;
            row.n_images = n;
            row.acc = aggregate(acc, pool.dataset_of, all_mask, pool.n_datasets, cfg.aggregation);
            row.acc_marked = row.acc;
            if (cfg.quality_metrics) {
                row.psnr = aggregate(psnr_v, pool.dataset_of, all_mask, pool.n_datasets, cfg.aggregation);
                row.ssim = aggregate(ssim_v, pool.dataset_of, all_mask, pool.n_datasets, cfg.aggregation);
            }
            row.clamped_fraction =
                aggregate(clamped, pool.dataset_of, all_mask, pool.n_datasets, cfg.aggregation);
            row.residual_energy =
                aggregate(resid, pool.dataset_of, all_mask, pool.n_datasets, cfg.aggregation);
            row.wall_ms = now_ms() - t0;
            rep.rows.push_back(std::move(row));
        }
    }
    rep.total_wall_ms = now_ms() - t_begin;
    return rep;
}

ExperimentReport run_mixing_experiment(const ExperimentConfig& cfg,
                                       const std::vector<Dataset>& data) {
    Pool pool = build_pool(data);
    const int n = static_cast<int>(pool.images.size());
    if (cfg.mix.codec_index < 0 ||
        cfg.mix.codec_index >= static_cast<int>(cfg.codecs.size()))
        fail(ErrorCategory::Config, "mix codec index out of range");
    const CodecSpec& spec = cfg.codecs[cfg.mix.codec_index];
    if (cfg.mix.ratios.empty()) fail(ErrorCategory::Config, "mix needs at least one ratio");

    AttackPipeline pipe_base;
    if (cfg.mix.attack.empty()) {
        pipe_base = named_pipeline("identity");
    } else {
        bool found = false;
        for (const AttackPipeline& a : cfg.attacks)
            if (a.name == cfg.mix.attack) {
                pipe_base = a;
                found = true;
                break;
            }
        if (!found) pipe_base = named_pipeline(cfg.mix.attack);
    }

    ExperimentReport rep;
    rep.kind = "mix";
    rep.seed = cfg.seed;
    rep.aggregation = cfg.aggregation;
    rep.n_images = n;
    rep.config_hash = [&] {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canonical_config_text(cfg))));
        return std::string(buf);
    }();
    rep.notes.push_back(kSubstitutionNote);
    rep.notes.push_back("mix rows: psnr/ssim/clamped_fraction/residual_energy cover the marked subset");

    const double t_begin = now_ms();
    std::map<int, LatentCodec> latents = fit_latent_codecs({pipe_base}, pool.images);
    const LatentCodec* latent = latent_for(latents, pipe_base);

    std::vector<ImageKey> keys(n);
    std::vector<Image> marked(n);
    std::vector<double> clamped(n, 0.0);
    std::vector<double> acc_if_marked(n, 0.0), acc_if_clean(n, 0.0);
    std::vector<double> psnr_v(n, 0.0), ssim_v(n, 0.0), resid(n, 0.0);
    parallel_for(n, cfg.workers, [&](int i) {
        keys[i] = make_image_key(cfg, spec, cfg.mix.codec_index, i);
        EmbedResult er = codec_embed(spec, pool.images[i], keys[i]);
        marked[i] = std::move(er.image);
        clamped[i] = er.clamped_fraction;
        AttackPipeline pipe = pipe_base;
        pipe.seed = derive_seed(derive_seed(cfg.seed, kAttackStream), static_cast<uint64_t>(i));
        Image attacked_marked = run_attack(marked[i], pipe, latent);
        Image attacked_clean = run_attack(pool.images[i], pipe, latent);
        acc_if_marked[i] = codec_detect(spec, attacked_marked, keys[i]).bit_accuracy;
        acc_if_clean[i] = codec_detect(spec, attacked_clean, keys[i]).bit_accuracy;
        if (cfg.quality_metrics) {
            psnr_v[i] = psnr(attacked_marked, pool.images[i]);
            ssim_v[i] = ssim(attacked_marked, pool.images[i]);
        }
        resid[i] = codec_residual(spec, attacked_marked, keys[i]);
    });

    // Per-dataset seeded shuffles; the marked subset for ratio p is the first
    // ceil(p * n_d) entries, so subsets are nested across ratios.
    std::vector<std::vector<int>> order_by_dataset(pool.n_datasets);
    for (int i = 0; i < n; ++i) order_by_dataset[pool.dataset_of[i]].push_back(i);
    for (int d = 0; d < pool.n_datasets; ++d) {
        auto& order = order_by_dataset[d];
        Rng rng(derive_seed(cfg.seed, kMixShuffleStream + static_cast<uint64_t>(d)));
        for (size_t i = order.size(); i > 1; --i) {
            size_t j = rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }
    }

    for (double p : cfg.mix.ratios) {
        std::vector<char> is_marked(n, 0);
        for (int d = 0; d < pool.n_datasets; ++d) {
            const auto& order = order_by_dataset[d];
            int m = ceil_count(p, static_cast<int>(order.size()));
            for (int i = 0; i < m; ++i) is_marked[order[i]] = 1;
        }
        std::vector<double> acc(n, 0.0);
        std::vector<char> not_marked(n, 0);
        for (int i = 0; i < n; ++i) {
            acc[i] = is_marked[i] ? acc_if_marked[i] : acc_if_clean[i];
            not_marked[i] = is_marked[i] ? 0 : 1;
        }
        ReportRow row;
        row.codec = spec.label;
        row.attack = pipe_base.name;
        row.ratio = p;
        row.n_images = n;
        row.acc = aggregate(acc, pool.dataset_of, std::vector<char>(n, 1), pool.n_datasets,
                            cfg.aggregation);
        row.acc_marked =
            aggregate(acc_if_marked, pool.dataset_of, is_marked, pool.n_datasets, cfg.aggregation);
        row.acc_unmarked =
            aggregate(acc_if_clean, pool.dataset_of, not_marked, pool.n_datasets, cfg.aggregation);
        if (cfg.quality_metrics) {
            row.psnr = aggregate(psnr_v, pool.dataset_of, is_marked, pool.n_datasets, cfg.aggregation);
            row.ssim = aggregate(ssim_v, pool.dataset_of, is_marked, pool.n_datasets, cfg.aggregation);
        }
        row.clamped_fraction =
            aggregate(clamped, pool.dataset_of, is_marked, pool.n_datasets, cfg.aggregation);
        row.residual_energy =
            aggregate(resid, pool.dataset_of, is_marked, pool.n_datasets, cfg.aggregation);
        rep.rows.push_back(std::move(row));
    }
    rep.total_wall_ms = now_ms() - t_begin;
    return rep;
}

// ---------------------------------------------------------------------------
// report rendering

std::string report_csv(const ExperimentReport& rep) {
    std::ostringstream out;
    out << "codec,attack,ratio,n_images,acc,acc_marked,acc_unmarked,psnr,ssim,"
           "clamped_fraction,residual_energy\n";
    for (const ReportRow& r : rep.rows) {
        out << r.codec << ',' << r.attack << ',' << format_num(r.ratio) << ',' << r.n_images
            << ',' << csv_cell(r.acc) << ',' << csv_cell(r.acc_marked) << ','
            << csv_cell(r.acc_unmarked) << ',' << csv_cell(r.psnr) << ',' << csv_cell(r.ssim)
            << ',' << csv_cell(r.clamped_fraction) << ',' << csv_cell(r.residual_energy)
            << '\n';
    }
    return out.str();
}

std::string report_markdown(const ExperimentReport& rep) {
    std::ostringstream out;
    out << "# watermark bench " << rep.kind << " report\n\n";
    out << "- version: " << rep.version << "\n";
    out << "- config_hash: " << rep.config_hash << "\n";
    out << "- seed: " << rep.seed << "\n";
    out << "- aggregation: " << rep.aggregation << "\n";
    out << "- images: " << rep.n_images << "\n";
    for (const std::string& note : rep.notes) out << "- note: " << note << "\n";
    out << "\n";
    out << "| codec | attack | ratio | n | acc | acc_marked | acc_unmarked | psnr | ssim | "
           "clamped | residual |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string("-") : format_num(v); };
    for (const ReportRow& r : rep.rows) {
        out << "| " << r.codec << " | " << r.attack << " | " << format_num(r.ratio) << " | "
            << r.n_images << " | " << cell(r.acc) << " | " << cell(r.acc_marked) << " | "
            << cell(r.acc_unmarked) << " | " << cell(r.psnr) << " | " << cell(r.ssim) << " | "
            << cell(r.clamped_fraction) << " | " << cell(r.residual_energy) << " |\n";
    }
    return out.str();
}

std::vector<std::pair<std::string, std::string>> report_svgs(const ExperimentReport& rep) {
    std::vector<std::string> labels;
    for (const ReportRow& r : rep.rows)
        if (std::find(labels.begin(), labels.end(), r.codec) == labels.end())
            labels.push_back(r.codec);

    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& label : labels) {
        std::vector<const ReportRow*> rows;
        for (const ReportRow& r : rep.rows)
            if (r.codec == label) rows.push_back(&r);
        PlotSpec spec;
        spec.y_label = "bit accuracy";
        spec.y_min = 0.0;
        spec.y_max = 1.0;
        PlotSeries acc_series, chance;
        acc_series.label = "acc";
        chance.label = "chance";
        if (rep.kind == "mix") {
            spec.title = "mixing study: " + label;
            spec.x_label = "protection ratio p";
            PlotSeries marked, unmarked, predicted;
            marked.label = "marked";
            unmarked.label = "unmarked";
            predicted.label = "p*acc_marked + (1-p)/2";
            for (const ReportRow* r : rows) {
                acc_series.x.push_back(r->ratio);
                acc_series.y.push_back(r->acc);
                chance.x.push_back(r->ratio);
                chance.y.push_back(0.5);
                if (!std::isnan(r->acc_marked)) {
                    marked.x.push_back(r->ratio);
                    marked.y.push_back(r->acc_marked);
                    predicted.x.push_back(r->ratio);
                    predicted.y.push_back(r->ratio * r->acc_marked + (1.0 - r->ratio) * 0.5);
                }
                if (!std::isnan(r->acc_unmarked)) {
                    unmarked.x.push_back(r->ratio);
                    unmarked.y.push_back(r->acc_unmarked);
                }
            }
            spec.series = {acc_series, marked, unmarked, predicted, chance};
        } else {
            spec.title = "robustness grid: " + label;
            spec.x_label = "attack";
            for (size_t i = 0; i < rows.size(); ++i) {
                acc_series.x.push_back(static_cast<double>(i));
                acc_series.y.push_back(rows[i]->acc);
                chance.x.push_back(static_cast<double>(i));
                chance.y.push_back(0.5);
                spec.x_tick_labels.push_back(rows[i]->attack);
            }
            spec.series = {acc_series, chance};
        }
        out.emplace_back(rep.kind + "_" + sanitize_label(label), render_line_plot(spec));
    }
    return out;
}

std::vector<std::string> emit_report(const ExperimentReport& rep,
                                     const ExperimentConfig& cfg,
                                     const std::string& out_dir,
                                     const std::vector<std::string>& formats) {
    if (rep.rows.empty()) fail(ErrorCategory::Config, "report has no rows to emit");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorCategory::Io, "cannot create output directory '" + out_dir + "': " + ec.message());

    auto want = [&formats](const char* f) {
        return std::find(formats.begin(), formats.end(), f) != formats.end();
    };
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& body) {
        std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, body);
        written.push_back(path);
    };

    if (want("csv")) emit(rep.kind + ".csv", report_csv(rep));
    if (want("md")) emit(rep.kind + ".md", report_markdown(rep));
    if (want("svg"))
        for (const auto& [stem, body] : report_svgs(rep)) emit(stem + ".svg", body);

    {
        std::ostringstream prov;
        prov << "kind " << rep.kind << "\n"
             << "version " << rep.version << "\n"
             << "config_hash " << rep.config_hash << "\n"
             << "seed " << rep.seed << "\n"
             << "aggregation " << rep.aggregation << "\n"
             << "images " << rep.n_images << "\n";
        for (const std::string& note : rep.notes) prov << "note " << note << "\n";
        prov << "--- canonical config ---\n" << canonical_config_text(cfg);
        emit(rep.kind + "_provenance.txt", prov.str());
    }
    {
        // Wall-clock sidecar: intentionally separate so the CSV/MD/SVG streams
        // stay byte-identical across reruns.
        std::ostringstream timing;
        timing << "codec,attack,ratio,wall_ms\n";
        for (const ReportRow& r : rep.rows)
            timing << r.codec << ',' << r.attack << ',' << format_num(r.ratio) << ','
                   << format_num(r.wall_ms) << '\n';
        timing << "total,,," << format_num(rep.total_wall_ms) << '\n';
        emit(rep.kind + "_timing.txt", timing.str());
    }
    return written;
}

}  // namespace wmb
