#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wmbench/attack.hpp"
#include "wmbench/config.hpp"
#include "wmbench/image.hpp"
#include "wmbench/watermark.hpp"

namespace wmb {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct CodecSpec {
    enum class Kind { SpreadSpectrum, Additive };
    Kind kind = Kind::SpreadSpectrum;
    std::string label;          // unique row label; defaulted from kind
    int payload_bits = 64;
    // spread-spectrum knobs
    double gamma = 4.0;
    int chips_per_bit = 16;
    int band_lo = 3;
    int band_hi = 6;
    double tau = 0.75;
    // additive knobs
    double alpha = 0.02;
    double tau_corr = 0.1;
};

struct MixSettings {
    std::vector<double> ratios = {0.2, 0.4, 0.6, 0.8, 1.0};
    int codec_index = 0;
    std::string attack;         // named pipeline applied to every image; empty = identity
};

struct ExperimentConfig {
    std::vector<std::string> datasets;   // directories of images
    std::string out_dir = "results";
    uint64_t seed = 1;
    int workers = 1;
    int resize_w = 0, resize_h = 0;      // 0 = keep native size
    std::vector<std::string> formats = {"csv", "md", "svg"};
    std::string aggregation = "micro";   // "micro" pools images; "macro" averages dataset means
    bool quality_metrics = true;         // PSNR/SSIM columns on/off
    std::vector<CodecSpec> codecs;       // empty handled by defaults at parse time
    std::vector<AttackPipeline> attacks; // grid cells; pipeline seeds assigned per run
    MixSettings mix;
};

std::vector<CodecSpec> default_codecs();
std::vector<AttackPipeline> default_grid_attacks();  // 3 distortions + 4 builtin chains

ExperimentConfig parse_experiment_config(const ConfigTable& root, const std::string& origin);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical text rendering of the effective config; hashing it gives the
// provenance config hash (CLI overrides included).
std::string canonical_config_text(const ExperimentConfig& cfg);
uint64_t fnv1a64(const std::string& data);

struct Dataset {
    std::string name;
    std::vector<std::string> image_names;  // lexicographic
    std::vector<Image> images;
};

Dataset ingest_dataset(const std::string& dir, int resize_w = 0, int resize_h = 0,
                       std::vector<std::string>* warnings = nullptr);
std::vector<Dataset> ingest_datasets(const ExperimentConfig& cfg,
                                     std::vector<std::string>* warnings = nullptr);

struct ReportRow {
    std::string codec;
    std::string attack;
    double ratio = 1.0;
    int n_images = 0;
    double acc = 0.0;
    double acc_marked = std::numeric_limits<double>::quiet_NaN();
    double acc_unmarked = std::numeric_limits<double>::quiet_NaN();
    double psnr = std::numeric_limits<double>::quiet_NaN();
    double ssim = std::numeric_limits<double>::quiet_NaN();
    double clamped_fraction = std::numeric_limits<double>::quiet_NaN();
    double residual_energy = std::numeric_limits<double>::quiet_NaN();
    double wall_ms = 0.0;  // kept out of CSV/MD so reports stay byte-stable
};

struct ExperimentReport {
    std::string kind;  // "grid" or "mix"
    std::vector<ReportRow> rows;
    uint64_t seed = 0;
    std::string config_hash;  // 16 hex digits
    std::string version = kToolkitVersion;
    std::string aggregation = "micro";
    int n_images = 0;
    std::vector<std::string> notes;
    double total_wall_ms = 0.0;
};

ExperimentReport run_robustness_grid(const ExperimentConfig& cfg,
                                     const std::vector<Dataset>& data);
ExperimentReport run_mixing_experiment(const ExperimentConfig& cfg,
                                       const std::vector<Dataset>& data);

std::string report_csv(const ExperimentReport& rep);
std::string report_markdown(const ExperimentReport& rep);
// One SVG per codec label; returns (filename stem, svg body) pairs.
std::vector<std::pair<std::string, std::string>> report_svgs(const ExperimentReport& rep);

// Writes <kind>.csv/<kind>.md/<kind>_<codec>.svg per `formats`, plus a
// provenance file and a (non-deterministic) timing sidecar, into out_dir.
// Returns the paths written.
std::vector<std::string> emit_report(const ExperimentReport& rep,
                                     const ExperimentConfig& cfg,
                                     const std::string& out_dir,
                                     const std::vector<std::string>& formats);

}  // namespace wmb
