#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wmbench/attack.hpp"
#include "wmbench/corpus.hpp"
#include "wmbench/degrade.hpp"
#include "wmbench/harness.hpp"
#include "wmbench/image.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/rng.hpp"
#include "wmbench/spectral.hpp"
#include "wmbench/svg.hpp"
#include "wmbench/watermark.hpp"

namespace {

using namespace wmb;

constexpr const char* kUsage = R"(wmbench - watermark robustness bench

usage: wmbench <command> [options]

commands:
  embed             embed a watermark into an image
  detect            run watermark detection on an image
  attack            run a degrade/restore pipeline on an image
  analyze-spectrum  per-band watermark attenuation report
  bench             codec x attack robustness grid over a dataset
  mix               protection-ratio mixing study over a dataset
  fit-latent        fit a PCA latent codec on a dataset directory
  make-corpus       write a synthetic dataset of PNG images

common flags:
  --config <file>   experiment config (bench/mix; optional for attack)
  --seed <u64>      override the experiment/key seed
  --out <path>      output file or directory
  --workers <n>     parallel image workers (bench/mix)
  --format <f>      csv|md|svg (restrict report formats)

embed:    --in <img> --out <img> [--key <keyfile>] [--save-key <file>]
          [--type ss|additive] [--seed <u64>] [--bits <n>] [--gamma <g>]
          [--alpha <a>] [--payload-hex <hex>]
detect:   --in <img> --key <keyfile> [--original <img>]
attack:   --in <img> --out <img> --pipeline <name> [--seed <u64>]
          [--latent-codec <file>] [--config <file>]
analyze-spectrum: --clean <img> --marked <img> [--attacked <img>]
          [--blur-sigma <s>] [--bands <n>] --out <dir> [--format csv|svg]
fit-latent: --in <dataset-dir> --out <codec-file> [--d <n>] [--resize <WxH>]
make-corpus: --out <dir> [--count <n>] [--seed <u64>] [--size <WxH>]

exit codes: 0 ok, 2 config, 3 io, 4 geometry, 5 capacity, 6 numeric, 7 internal
)";

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Io: return 3;
        case ErrorCategory::Geometry: return 4;
        case ErrorCategory::Capacity: return 5;
        case ErrorCategory::Numeric: return 6;
        case ErrorCategory::Internal: return 7;
    }
    return 7;
}

struct Args {
    std::map<std::string, std::string> named;
    std::vector<std::string> positional;

    bool has(const std::string& k) const { return named.count(k) != 0; }
    std::string get(const std::string& k, const std::string& dflt = "") const {
        auto it = named.find(k);
        return it == named.end() ? dflt : it->second;
    }
    std::string require(const std::string& k) const {
        auto it = named.find(k);
        if (it == named.end())
            fail(ErrorCategory::Config, "missing required flag --" + k);
        return it->second;
    }
    uint64_t get_u64(const std::string& k, uint64_t dflt) const {
        auto it = named.find(k);
        if (it == named.end()) return dflt;
        try {
            size_t pos = 0;
            uint64_t v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(ErrorCategory::Config, "--" + k + " expects an unsigned integer, got '" +
                                            it->second + "'");
        }
    }
    int get_int(const std::string& k, int dflt) const {
        auto it = named.find(k);
        if (it == named.end()) return dflt;
        try {
            size_t pos = 0;
            int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(ErrorCategory::Config, "--" + k + " expects an integer, got '" + it->second + "'");
        }
    }
    double get_double(const std::string& k, double dflt) const {
        auto it = named.find(k);
        if (it == named.end()) return dflt;
        try {
            size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(ErrorCategory::Config, "--" + k + " expects a number, got '" + it->second + "'");
        }
    }
};

Args parse_args(int argc, char** argv, int start,
                const std::vector<std::string>& known_flags) {
    Args args;
    for (int i = start; i < argc; ++i) {
        std::string a = argv[i];
        if (a.rfind("--", 0) == 0) {
            std::string key = a.substr(2);
            std::string value;
            size_t eq = key.find('=');
            if (eq != std::string::npos) {
                value = key.substr(eq + 1);
                key = key.substr(0, eq);
            } else {
                if (i + 1 >= argc)
                    fail(ErrorCategory::Config, "flag --" + key + " expects a value");
                value = argv[++i];
            }
            bool known = false;
            for (const std::string& f : known_flags)
                if (f == key) known = true;
            if (!known) fail(ErrorCategory::Config, "unknown flag --" + key);
            if (args.named.count(key))
                fail(ErrorCategory::Config, "flag --" + key + " given twice");
            args.named[key] = value;
        } else {
            args.positional.push_back(a);
        }
    }
    return args;
}

ExperimentConfig load_cfg_with_overrides(const Args& args, bool config_required) {
    ExperimentConfig cfg;
    if (args.has("config")) {
        cfg = load_experiment_config(args.get("config"));
    } else if (config_required) {
        fail(ErrorCategory::Config, "this command needs --config <file>");
    } else {
        cfg.codecs = default_codecs();
        cfg.attacks = default_grid_attacks();
    }
    if (args.has("seed")) cfg.seed = args.get_u64("seed", cfg.seed);
    if (args.has("out")) cfg.out_dir = args.get("out");
    if (args.has("workers")) {
        cfg.workers = args.get_int("workers", cfg.workers);
        if (cfg.workers < 1) fail(ErrorCategory::Config, "--workers must be >= 1");
    }
    if (args.has("format")) {
        std::string f = args.get("format");
        if (f != "csv" && f != "md" && f != "svg")
            fail(ErrorCategory::Config, "--format must be csv, md, or svg");
        cfg.formats = {f};
    }
    return cfg;
}

std::vector<uint8_t> payload_for(const Args& args, int bits, uint64_t seed) {
    if (args.has("payload-hex")) return payload_from_hex(args.get("payload-hex"), bits);
    return random_payload(bits, derive_seed(seed, 0x7061796c6full));
}

int cmd_embed(const Args& args) {
    Image img = load_image(args.require("in"));
    WatermarkKey key;
    if (args.has("key")) {
        key = load_key(args.get("key"));
    } else {
        std::string type = args.get("type", "ss");
        uint64_t seed = args.get_u64("seed", 1);
        int bits = args.get_int("bits", 64);
        if (bits <= 0) fail(ErrorCategory::Config, "--bits must be positive");
        if (type == "ss") {
            SpreadSpectrumKey k;
            k.seed = seed;
            k.gamma = args.get_double("gamma", k.gamma);
            k.payload = payload_for(args, bits, seed);
            key = k;
        } else if (type == "additive") {
            AdditiveKeySpec k;
            k.width = img.width;
            k.height = img.height;
            k.seed = seed;
            k.alpha = args.get_double("alpha", k.alpha);
            k.payload = payload_for(args, bits, seed);
            key = k;
        } else {
            fail(ErrorCategory::Config, "--type must be 'ss' or 'additive'");
        }
    }

    EmbedResult result;
    if (const auto* k = std::get_if<SpreadSpectrumKey>(&key)) {
        result = embed_ss(img, *k);
    } else {
        const auto& spec = std::get<AdditiveKeySpec>(key);
        if (spec.width != img.width || spec.height != img.height)
            fail(ErrorCategory::Geometry, "additive key geometry does not match the image");
        AdditivePattern wm =
            make_additive_pattern(spec.width, spec.height, spec.seed, spec.payload, spec.alpha);
        result = embed_additive(img, wm);
    }
    save_image(result.image, args.require("out"));
    if (args.has("save-key")) save_key(key, args.get("save-key"));
    std::cout << "clamped_fraction " << format_num(result.clamped_fraction) << "\n"
              << "psnr " << format_num(psnr(result.image, img)) << "\n";
    return 0;
}

int cmd_detect(const Args& args) {
    Image img = load_image(args.require("in"));
    WatermarkKey key = load_key(args.require("key"));
    std::optional<Image> original;
    if (args.has("original")) original = load_image(args.get("original"));

    DetectionResult det;
    if (const auto* k = std::get_if<SpreadSpectrumKey>(&key)) {
        det = extract_ss(img, *k);
    } else {
        const auto& spec = std::get<AdditiveKeySpec>(key);
        AdditivePattern wm =
            make_additive_pattern(spec.width, spec.height, spec.seed, spec.payload, spec.alpha);
        det = detect_additive(img, wm, original ? &*original : nullptr);
    }
    std::cout << "decision " << (det.decision ? 1 : 0) << "\n"
              << "bit_accuracy " << format_num(det.bit_accuracy) << "\n"
              << "correlation " << format_num(det.correlation) << "\n"
              << "threshold " << format_num(det.threshold) << "\n"
              << "payload_hex " << payload_to_hex(det.bits) << "\n";
    return 0;
}

int cmd_attack(const Args& args) {
    Image img = load_image(args.require("in"));
    AttackPipeline pipe;
    if (args.has("pipeline")) {
        std::string name = args.get("pipeline");
        pipe.name.clear();
        if (args.has("config")) {
            ExperimentConfig cfg = load_experiment_config(args.get("config"));
            for (const AttackPipeline& a : cfg.attacks)
                if (a.name == name) pipe = a;
        }
        if (pipe.name.empty()) pipe = named_pipeline(name);
    } else if (args.has("config")) {
        ExperimentConfig cfg = load_experiment_config(args.get("config"));
        if (cfg.attacks.size() != 1)
            fail(ErrorCategory::Config,
                 "config defines " + std::to_string(cfg.attacks.size()) +
                     " attacks; pick one with --pipeline <name>");
        pipe = cfg.attacks[0];
    } else {
        fail(ErrorCategory::Config, "attack needs --pipeline <name> or --config <file>");
    }
    pipe.seed = args.get_u64("seed", 1);

    std::optional<LatentCodec> codec;
    if (args.has("latent-codec")) codec = load_latent_codec(args.get("latent-codec"));
    if (needs_latent_codec(pipe) && !codec)
        fail(ErrorCategory::Config,
             "pipeline '" + pipe.name + "' has a latent stage; pass --latent-codec <file>");

    Image out = run_attack(img, pipe, codec ? &*codec : nullptr);
    save_image(out, args.require("out"));
    std::cout << "pipeline " << pipe.name << "\n"
              << "psnr " << format_num(psnr(out, img)) << "\n"
              << "ssim " << format_num(ssim(out, img)) << "\n";
    return 0;
}

int cmd_analyze_spectrum(const Args& args) {
    Image clean = load_image(args.require("clean"));
    Image marked = load_image(args.require("marked"));
    int n_bands = args.get_int("bands", 8);
    if (n_bands < 1) fail(ErrorCategory::Config, "--bands must be >= 1");

    std::optional<BlurParams> blur;
    if (args.has("blur-sigma")) {
        BlurParams bp;
        bp.sigma = args.get_double("blur-sigma", 0.0);
        bp.mode = BlurMode::Periodic;
        blur = bp;
    }
    Image attacked;
    if (args.has("attacked")) {
        attacked = load_image(args.get("attacked"));
    } else if (blur) {
        attacked = gaussian_blur(marked, *blur);
    } else {
        fail(ErrorCategory::Config, "analyze-spectrum needs --attacked <img> or --blur-sigma <s>");
    }

    BandEnergyReport report =
        suppression_profile(clean, marked, attacked, default_band_edges(n_bands), blur);

    std::string out_dir = args.get("out", ".");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCategory::Io, "cannot create '" + out_dir + "': " + ec.message());
    std::string fmt = args.get("format", "");
    auto want = [&fmt](const char* f) { return fmt.empty() || fmt == f; };
    if (want("csv")) {
        std::string path = (std::filesystem::path(out_dir) / "spectrum.csv").string();
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCategory::Io, "cannot write '" + path + "'");
        out << band_report_csv(report);
        std::cout << "wrote " << path << "\n";
    }
    if (want("svg")) {
        std::string path = (std::filesystem::path(out_dir) / "spectrum.svg").string();
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCategory::Io, "cannot write '" + path + "'");
        out << band_report_svg(report, "watermark band attenuation");
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}

int cmd_bench(const Args& args, bool mixing) {
    ExperimentConfig cfg = load_cfg_with_overrides(args, /*config_required=*/true);
    std::vector<std::string> warnings;
    std::vector<Dataset> data = ingest_datasets(cfg, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    ExperimentReport rep =
        mixing ? run_mixing_experiment(cfg, data) : run_robustness_grid(cfg, data);
    std::vector<std::string> written = emit_report(rep, cfg, cfg.out_dir, cfg.formats);
    for (const std::string& p : written) std::cout << "wrote " << p << "\n";
    return 0;
}

std::pair<int, int> parse_size(const std::string& size, const char* flag) {
    size_t x = size.find('x');
    if (x == std::string::npos)
        fail(ErrorCategory::Config, std::string(flag) + " expects WxH, e.g. 128x128");
    try {
        return {std::stoi(size.substr(0, x)), std::stoi(size.substr(x + 1))};
    } catch (const std::exception&) {
        fail(ErrorCategory::Config, std::string(flag) + " expects WxH, e.g. 128x128");
    }
}

int cmd_fit_latent(const Args& args) {
    int d = args.get_int("d", 32);
    if (d < 1) fail(ErrorCategory::Config, "--d must be >= 1");
    int rw = 0, rh = 0;
    std::string resize = args.get("resize", "");
    if (!resize.empty()) std::tie(rw, rh) = parse_size(resize, "--resize");
    std::string dir = args.require("in");
    std::vector<std::string> warnings;
    Dataset ds = ingest_dataset(dir, rw, rh, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    LatentCodec codec = fit_latent_codec(ds.images, d);
    save_latent_codec(codec, args.require("out"),
                      "fit-latent dataset=" + dir + " d=" + std::to_string(d));
    std::cout << "fitted d=" << d << " on " << ds.images.size() << " images\n";
    return 0;
}

int cmd_make_corpus(const Args& args) {
    CorpusParams params;
    params.count = args.get_int("count", params.count);
    params.seed = args.get_u64("seed", params.seed);
    std::string size = args.get("size", "");
    if (!size.empty())
        std::tie(params.width, params.height) = parse_size(size, "--size");
    std::vector<std::string> paths = write_corpus(args.require("out"), params);
    std::cout << "wrote " << paths.size() << " images to " << args.require("out") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << kUsage;
        return 2;
    }
    std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "-h" || cmd == "help") {
        std::cout << kUsage;
        return 0;
    }
    try {
        Args args;
        if (cmd == "embed") {
            args = parse_args(argc, argv, 2,
                              {"in", "out", "key", "save-key", "type", "seed", "bits", "gamma",
                               "alpha", "payload-hex"});
            return cmd_embed(args);
        }
        if (cmd == "detect") {
            args = parse_args(argc, argv, 2, {"in", "key", "original"});
            return cmd_detect(args);
        }
        if (cmd == "attack") {
            args = parse_args(argc, argv, 2,
                              {"in", "out", "pipeline", "config", "seed", "latent-codec"});
            return cmd_attack(args);
        }
        if (cmd == "analyze-spectrum") {
            args = parse_args(argc, argv, 2,
                              {"clean", "marked", "attacked", "blur-sigma", "bands", "out",
                               "format"});
            return cmd_analyze_spectrum(args);
        }
        if (cmd == "bench" || cmd == "mix") {
            args = parse_args(argc, argv, 2, {"config", "seed", "out", "workers", "format"});
            return cmd_bench(args, cmd == "mix");
        }
        if (cmd == "fit-latent") {
            args = parse_args(argc, argv, 2, {"in", "out", "d", "resize"});
            return cmd_fit_latent(args);
        }
        if (cmd == "make-corpus") {
            args = parse_args(argc, argv, 2, {"out", "count", "seed", "size"});
            return cmd_make_corpus(args);
        }
        std::cerr << "unknown command '" << cmd << "'\n\n" << kUsage;
        return 2;
    } catch (const wmb::Error& e) {
        std::cerr << "error category=" << wmb::to_string(e.category()) << " message=" << e.what()
                  << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error category=internal message=" << e.what() << "\n";
        return 7;
    }
}
