#include <catch2/catch.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "wmbench/config.hpp"
#include "wmbench/errors.hpp"
#include "wmbench/harness.hpp"
#include "wmbench/metrics.hpp"

using namespace wmb;

namespace {

std::vector<Dataset> memory_dataset(int count, int w = 128, int h = 128,
                                    uint64_t seed = 2026) {
    CorpusParams p;
    p.count = count;
    p.width = w;
    p.height = h;
    p.seed = seed;
    Dataset d;
    d.name = "mem";
    d.images = make_corpus(p);
    for (int i = 0; i < count; ++i)
        d.image_names.push_back("img_" + std::to_string(i));
    return {d};
}

ExperimentConfig small_config(uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.codecs = default_codecs();
    cfg.attacks = {named_pipeline("identity"), named_pipeline("noise-0.02")};
    return cfg;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

// --- config parser -----------------------------------------------------------

TEST_CASE("config parser handles values, tables, and stage arrays",
          "[config]") {
    const std::string text = R"(
# experiment description
seed = 42
out_dir = "results/run1"
workers = 4
quality_metrics = true
ratios = [0.2, 0.4, 1.0]
datasets = ["a", "b"]

[mix]
codec = 0
attack = "denoise-attack"

[[attack]]
name = "custom"
  [[attack.stage]]
  kind = "noise"
  sigma = 0.05
  [[attack.stage]]
  kind = "tv"
  beta = 0.1
)";
    ConfigTable root = parse_config(text, "inline");
    TableView v(root, "inline");
    REQUIRE(v.get_u64("seed", 0) == 42);
    REQUIRE(v.get_string("out_dir", "") == "results/run1");
    REQUIRE(v.get_int("workers", 1) == 4);
    REQUIRE(v.get_bool("quality_metrics", false));
    auto ratios = v.get_number_array("ratios");
    REQUIRE(ratios == std::vector<double>{0.2, 0.4, 1.0});
    REQUIRE(v.get_string_array("datasets") ==
            std::vector<std::string>{"a", "b"});

    auto attacks = v.table_array("attack");
    REQUIRE(attacks.size() == 1);
    TableView atk(*attacks[0], "inline.attack");
    REQUIRE(atk.get_string("name", "") == "custom");
    auto stages = atk.table_array("stage");
    REQUIRE(stages.size() == 2);
    REQUIRE(TableView(*stages[0], "s").get_string("kind", "") == "noise");
    REQUIRE(TableView(*stages[1], "s").get_string("kind", "") == "tv");
}

TEST_CASE("config parser rejects malformed input", "[config]") {
    REQUIRE_THROWS_AS(parse_config("seed = ", "x"), Error);
    REQUIRE_THROWS_AS(parse_config("seed 42", "x"), Error);
    REQUIRE_THROWS_AS(parse_config("seed = 1\nseed = 2\n", "x"), Error);
    REQUIRE_THROWS_AS(parse_config("s = \"unterminated", "x"), Error);
    // Mixed-element arrays parse (value typing is the reader's concern) but
    // every typed getter refuses them.
    ConfigTable mixed = parse_config("a = [1, \"two\"]", "x");
    REQUIRE_THROWS_AS(TableView(mixed, "x").get_number_array("a"), Error);
    REQUIRE_THROWS_AS(TableView(mixed, "x").get_string_array("a"), Error);
    bool threw = false;
    try {
        parse_config("ok = 1\nbad = @!\n", "myfile.toml");
    } catch (const Error& e) {
        threw = true;
        REQUIRE(e.category() == ErrorCategory::Config);
        std::string msg = e.what();
        REQUIRE(msg.find("myfile.toml") != std::string::npos);
        REQUIRE(msg.find("2") != std::string::npos);  // 1-based line number
    }
    REQUIRE(threw);
    // Comments and whitespace are fine, including inside strings.
    ConfigTable t = parse_config("s = \"a # not a comment\"  # real one\n", "x");
    REQUIRE(TableView(t, "x").get_string("s", "") == "a # not a comment");
}

TEST_CASE("experiment config rejects unknown keys loudly", "[config]") {
    REQUIRE_THROWS_AS(
        parse_experiment_config(parse_config("sede = 1\n", "x"), "x"), Error);
    REQUIRE_THROWS_AS(
        parse_experiment_config(
            parse_config("[mix]\nratois = [0.5]\n", "x"), "x"),
        Error);
    try {
        parse_experiment_config(parse_config("sede = 1\n", "x"), "x");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("sede") != std::string::npos);
    }
}

TEST_CASE("experiment config applies defaults and validates values",
          "[config]") {
    ExperimentConfig cfg =
        parse_experiment_config(parse_config("seed = 9\n", "x"), "x");
    REQUIRE(cfg.seed == 9);
    REQUIRE(cfg.workers == 1);
    REQUIRE(cfg.codecs.size() == 2);  // defaults: ss + additive
    REQUIRE(cfg.attacks.size() == 7);  // 3 distortions + 4 chains
    REQUIRE(cfg.mix.ratios == std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});

    REQUIRE_THROWS_AS(parse_experiment_config(
                          parse_config("[mix]\nratios = [0.0]\n", "x"), "x"),
                      Error);
    REQUIRE_THROWS_AS(parse_experiment_config(
                          parse_config("[mix]\nratios = [1.5]\n", "x"), "x"),
                      Error);
    REQUIRE_THROWS_AS(
        parse_experiment_config(parse_config("workers = 0\n", "x"), "x"),
        Error);
    REQUIRE_THROWS_AS(
        parse_experiment_config(parse_config("resize = [128]\n", "x"), "x"),
        Error);
    REQUIRE_THROWS_AS(parse_experiment_config(
                          parse_config("[[codec]]\ntype = \"warp\"\n", "x"),
                          "x"),
                      Error);
    // Attack tables are builtin references or explicit stage lists, not both.
    REQUIRE_THROWS_AS(
        parse_experiment_config(
            parse_config("[[attack]]\nbuiltin = \"jpeg-75\"\n"
                         "  [[attack.stage]]\n  kind = \"noise\"\n",
                         "x"),
            "x"),
        Error);
    REQUIRE_THROWS_AS(
        parse_experiment_config(
            parse_config("[[attack]]\nname = \"solo\"\n", "x"), "x"),
        Error);  // custom attack without stages
}

TEST_CASE("canonical config text pins the provenance hash", "[config]") {
    ExperimentConfig a = small_config(1);
    ExperimentConfig b = small_config(1);
    REQUIRE(canonical_config_text(a) == canonical_config_text(b));
    b.seed = 2;
    REQUIRE(canonical_config_text(a) != canonical_config_text(b));
    REQUIRE(fnv1a64("abc") == fnv1a64("abc"));
    REQUIRE(fnv1a64("abc") != fnv1a64("abd"));
}

// --- dataset ingestion ---------------------------------------------------------

TEST_CASE("ingest_dataset orders, resizes, and tolerates bad files",
          "[harness][io]") {
    wmbt::TempDir tmp;
    CorpusParams p;
    p.count = 3;
    p.width = 32;
    p.height = 32;
    auto imgs = make_corpus(p);
    save_image(imgs[0], tmp.file("b.png"));
    save_image(imgs[1], tmp.file("a.png"));
    save_image(center_crop_resize(imgs[2], 24, 24), tmp.file("c.ppm"));
    {
        std::ofstream bad(tmp.file("broken.png"));
        bad << "junk";
    }
    {
        std::ofstream skip(tmp.file("notes.txt"));
        skip << "not an image";
    }

    std::vector<std::string> warnings;
    Dataset d = ingest_dataset(tmp.path.string(), 24, 24, &warnings);
    REQUIRE(d.images.size() == 3);
    REQUIRE(warnings.size() == 1);
    REQUIRE(warnings[0].find("broken.png") != std::string::npos);
    REQUIRE(d.image_names ==
            std::vector<std::string>{"a.png", "b.png", "c.ppm"});
    for (const auto& img : d.images) {
        REQUIRE(img.width == 24);
        REQUIRE(img.height == 24);
    }
}

TEST_CASE("ingest_dataset aborts only when nothing is readable",
          "[harness][io]") {
    wmbt::TempDir tmp;
    try {
        ingest_dataset(tmp.path.string(), 0, 0, nullptr);
        FAIL("empty directory must raise");
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Io);
        REQUIRE(std::string(e.what()).find("no valid images") !=
                std::string::npos);
    }
    REQUIRE_THROWS_AS(ingest_dataset(tmp.file("missing_dir"), 0, 0, nullptr),
                      Error);
}

// --- robustness grid -------------------------------------------------------------

TEST_CASE("grid rows cover codec x attack with stable labels", "[harness]") {
    ExperimentConfig cfg = small_config();
    cfg.attacks = {named_pipeline("identity"), named_pipeline("noise-0.02"),
                   named_pipeline("jpeg-75")};
    auto data = memory_dataset(5);
    ExperimentReport rep = run_robustness_grid(cfg, data);
    REQUIRE(rep.kind == "grid");
    REQUIRE(rep.rows.size() == 6);  // 2 codecs x 3 attacks
    REQUIRE(rep.n_images == 5);
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& row : rep.rows) {
        cells.insert({row.codec, row.attack});
        REQUIRE(row.n_images == 5);
        REQUIRE(row.acc >= 0.0);
        REQUIRE(row.acc <= 1.0);
        REQUIRE(row.ratio == 1.0);
    }
    REQUIRE(cells.size() == 6);
    REQUIRE(report_svgs(rep).size() == 2);  // one curve file per codec
}

TEST_CASE("identity cell equals the no-attack baseline bit-identically",
          "[harness]") {
    // The identity attack must not perturb a single sample, so detection on
    // the attacked copy reproduces the embed-time round-trip exactly, and the
    // reported psnr (always measured against the clean original) equals the
    // pure embedding distortion.
    ExperimentConfig cfg = small_config();
    cfg.attacks = {named_pipeline("identity")};
    cfg.codecs.resize(1);  // spread-spectrum
    auto data = memory_dataset(6);
    cfg.attacks.push_back(named_pipeline("jpeg-75"));
    ExperimentReport rep = run_robustness_grid(cfg, data);
    REQUIRE(rep.rows.size() == 2);
    REQUIRE(rep.rows[0].attack == "identity");
    REQUIRE(rep.rows[0].acc == 1.0);  // exact, not approximate
    REQUIRE(rep.rows[0].residual_energy > 0.5);
    // psnr is measured against the clean original, so the identity row shows
    // pure embedding distortion: finite, gentle, and above any lossy attack.
    REQUIRE(std::isfinite(rep.rows[0].psnr));
    REQUIRE(rep.rows[0].psnr > 35.0);
    REQUIRE(rep.rows[0].psnr > rep.rows[1].psnr);
}

TEST_CASE("grid reports are deterministic and worker-invariant", "[harness]") {
    ExperimentConfig cfg = small_config(7);
    cfg.attacks = {named_pipeline("noise-0.02"), named_pipeline("jpeg-75")};
    auto data = memory_dataset(6);

    ExperimentReport r1 = run_robustness_grid(cfg, data);
    ExperimentReport r2 = run_robustness_grid(cfg, data);
    REQUIRE(report_csv(r1) == report_csv(r2));

    ExperimentConfig par = cfg;
    par.workers = 4;
    ExperimentReport r4 = run_robustness_grid(par, data);
    REQUIRE(report_csv(r1) == report_csv(r4));

    ExperimentConfig other = cfg;
    other.seed = 8;
    ExperimentReport r8 = run_robustness_grid(other, data);
    REQUIRE(report_csv(r1) != report_csv(r8));
}

TEST_CASE("CSV schema is fixed and NaN-free cells stay empty", "[harness]") {
    ExperimentConfig cfg = small_config();
    cfg.attacks = {named_pipeline("identity")};
    cfg.codecs.resize(1);
    auto data = memory_dataset(3);
    ExperimentReport rep = run_robustness_grid(cfg, data);
    std::string csv = report_csv(rep);
    REQUIRE(csv.rfind("codec,attack,ratio,n_images,acc,acc_marked,"
                      "acc_unmarked,psnr,ssim,clamped_fraction,"
                      "residual_energy\n",
                      0) == 0);
    REQUIRE(count_lines(csv) == 2);  // header + single row
    // Grid rows have no marked/unmarked split: those cells are empty.
    std::string row = csv.substr(csv.find('\n') + 1);
    REQUIRE(row.find(",,") != std::string::npos);
    REQUIRE(row.find("nan") == std::string::npos);
    REQUIRE(row.find("inf") == std::string::npos);

    std::string md = report_markdown(rep);
    REQUIRE(md.find("| codec") != std::string::npos);
    REQUIRE(md.find(rep.config_hash) != std::string::npos);
}

TEST_CASE("macro aggregation averages dataset means", "[harness]") {
    // Two datasets of different sizes: micro pools 9 images, macro averages
    // the two per-dataset means. A noise attack makes the accuracies differ
    // across datasets, so the two policies disagree unless sizes match.
    CorpusParams p1;
    p1.count = 6;
    p1.seed = 100;
    CorpusParams p2;
    p2.count = 3;
    p2.seed = 200;
    Dataset d1{"one", {}, make_corpus(p1)};
    Dataset d2{"two", {}, make_corpus(p2)};
    for (int i = 0; i < 6; ++i) d1.image_names.push_back("a" + std::to_string(i));
    for (int i = 0; i < 3; ++i) d2.image_names.push_back("b" + std::to_string(i));

    ExperimentConfig cfg = small_config(3);
    cfg.codecs.resize(1);
    cfg.codecs[0].gamma = 1.0;  // weak embedding: accuracies off the ceiling
    cfg.attacks = {named_pipeline("noise-0.02")};
    ExperimentReport micro = run_robustness_grid(cfg, {d1, d2});

    ExperimentConfig macro_cfg = cfg;
    macro_cfg.aggregation = "macro";
    ExperimentReport macro = run_robustness_grid(macro_cfg, {d1, d2});

    REQUIRE(micro.rows.size() == 1);
    REQUIRE(macro.rows.size() == 1);
    REQUIRE(micro.aggregation == "micro");
    REQUIRE(macro.aggregation == "macro");
    REQUIRE(micro.rows[0].acc != Approx(macro.rows[0].acc).margin(1e-9));
}

// --- mixing experiment -----------------------------------------------------------

TEST_CASE("mix p = 1 with no attack is exact", "[harness][mix]") {
    ExperimentConfig cfg = small_config(5);
    cfg.mix.ratios = {1.0};
    auto data = memory_dataset(8);
    ExperimentReport rep = run_mixing_experiment(cfg, data);
    REQUIRE(rep.kind == "mix");
    REQUIRE(rep.rows.size() == 1);
    REQUIRE(rep.rows[0].ratio == 1.0);
    REQUIRE(rep.rows[0].acc == 1.0);
    REQUIRE(rep.rows[0].acc_marked == 1.0);
    REQUIRE(std::isnan(rep.rows[0].acc_unmarked));  // no unmarked subset
}

TEST_CASE("mix selects exactly ceil(p*n) marked images", "[harness][mix]") {
    // With the identity attack the spread-spectrum codec decodes marked
    // images perfectly, so the marked count is recoverable from the pooled
    // means: m = n*(acc - acc_unmarked) / (1 - acc_unmarked).
    auto data = memory_dataset(10);
    for (double p : {0.2, 0.25, 0.3, 0.5, 0.7}) {
        ExperimentConfig cfg = small_config(11);
        cfg.mix.ratios = {p};
        ExperimentReport rep = run_mixing_experiment(cfg, data);
        const auto& row = rep.rows[0];
        REQUIRE(row.acc_marked == 1.0);
        double m = 10.0 * (row.acc - row.acc_unmarked) /
                   (1.0 - row.acc_unmarked);
        double expected = std::ceil(p * 10.0 - 1e-9);
        INFO("p = " << p);
        REQUIRE(m == Approx(expected).margin(1e-6));
    }
}

TEST_CASE("mix aggregate accuracy is monotone in p and near the mixture law",
          "[harness][mix]") {
    ExperimentConfig cfg = small_config(13);
    cfg.mix.ratios = {0.2, 0.4, 0.6, 0.8, 1.0};
    auto data = memory_dataset(40);
    ExperimentReport rep = run_mixing_experiment(cfg, data);
    REQUIRE(rep.rows.size() == 5);
    double prev = 0.0;
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& row = rep.rows[i];
        REQUIRE(row.ratio == Approx(cfg.mix.ratios[i]));
        REQUIRE(row.acc >= prev - 1e-12);
        prev = row.acc;
        // Identity attack: marked side decodes perfectly, so the mixture law
        // is p + (1-p)/2 up to binomial noise on the unmarked side.
        double predicted = row.ratio + (1.0 - row.ratio) * 0.5;
        REQUIRE(row.acc == Approx(predicted).margin(0.05));
    }
    REQUIRE(rep.rows[4].acc == 1.0);
}

TEST_CASE("mix rows are deterministic and worker-invariant", "[harness][mix]") {
    ExperimentConfig cfg = small_config(17);
    cfg.mix.ratios = {0.4, 0.8};
    cfg.mix.attack = "noise-0.02";
    auto data = memory_dataset(8);
    ExperimentReport a = run_mixing_experiment(cfg, data);
    ExperimentReport b = run_mixing_experiment(cfg, data);
    REQUIRE(report_csv(a) == report_csv(b));
    ExperimentConfig par = cfg;
    par.workers = 3;
    ExperimentReport c = run_mixing_experiment(par, data);
    REQUIRE(report_csv(a) == report_csv(c));
    REQUIRE(report_svgs(a).size() == 1);
}

TEST_CASE("mix marked sets nest across ratios", "[harness][mix]") {
    // The p-grid uses one shuffle per dataset with prefix selection, so the
    // marked accuracy at a larger p pools a superset of images. With the
    // identity attack both subsets decode perfectly; under noise the nesting
    // shows up as deterministic reproducibility of the smaller prefix run.
    ExperimentConfig cfg = small_config(19);
    cfg.mix.ratios = {0.25, 0.5};
    auto data = memory_dataset(8);
    ExperimentReport both = run_mixing_experiment(cfg, data);

    ExperimentConfig solo = cfg;
    solo.mix.ratios = {0.25};
    ExperimentReport one = run_mixing_experiment(solo, data);
    REQUIRE(one.rows.size() == 1);
    REQUIRE(one.rows[0].acc == both.rows[0].acc);
    REQUIRE(one.rows[0].acc_marked == both.rows[0].acc_marked);
}

// --- emit_report -----------------------------------------------------------------

TEST_CASE("emit_report writes the requested artifacts", "[harness][io]") {
    wmbt::TempDir tmp;
    ExperimentConfig cfg = small_config(23);
    cfg.attacks = {named_pipeline("identity")};
    auto data = memory_dataset(3);
    ExperimentReport rep = run_robustness_grid(cfg, data);

    auto paths = emit_report(rep, cfg, tmp.file("out"), {"csv", "md", "svg"});
    std::set<std::string> names;
    for (const auto& p : paths)
        names.insert(std::filesystem::path(p).filename().string());
    REQUIRE(names.count("grid.csv") == 1);
    REQUIRE(names.count("grid.md") == 1);
    REQUIRE(names.count("grid_provenance.txt") == 1);
    size_t svgs = 0;
    for (const auto& n : names)
        if (n.size() > 4 && n.substr(n.size() - 4) == ".svg") ++svgs;
    REQUIRE(svgs == 2);

    // CSV on disk matches the in-memory rendering byte for byte.
    std::ifstream in(tmp.file("out") + "/grid.csv", std::ios::binary);
    std::string disk((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    REQUIRE(disk == report_csv(rep));

    // Provenance records hash, seed, and version.
    std::ifstream pin(tmp.file("out") + "/grid_provenance.txt");
    std::string prov((std::istreambuf_iterator<char>(pin)),
                     std::istreambuf_iterator<char>());
    REQUIRE(prov.find(rep.config_hash) != std::string::npos);
    REQUIRE(prov.find(kToolkitVersion) != std::string::npos);

    // csv-only emission writes no markdown or plots.
    auto csv_only = emit_report(rep, cfg, tmp.file("csvonly"), {"csv"});
    for (const auto& p : csv_only) {
        REQUIRE(p.find(".md") == std::string::npos);
        REQUIRE(p.find(".svg") == std::string::npos);
    }

    // Unwritable destination is an Io error.
    std::ofstream block(tmp.file("blocker"));
    block << "file";
    block.close();
    REQUIRE_THROWS_AS(
        emit_report(rep, cfg, tmp.file("blocker") + "/sub", {"csv"}), Error);
}
