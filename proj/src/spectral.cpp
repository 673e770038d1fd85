#include "wmbench/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "wmbench/rng.hpp"
#include "wmbench/svg.hpp"

namespace wmb {

std::vector<double> default_band_edges(int n_bands) {
    if (n_bands < 1) fail(ErrorCategory::Config, "band count must be >= 1");
    const double top = std::sqrt(0.5);
    std::vector<double> edges(static_cast<size_t>(n_bands) + 1);
    for (int i = 0; i <= n_bands; ++i)
        edges[static_cast<size_t>(i)] = top * i / n_bands;
    return edges;
}

SpectralField watermark_spectrum(const Image& clean, const Image& marked) {
    require_same_geometry(clean, marked, "watermark_spectrum");
    auto yc = luma_plane(clean);
    auto ym = luma_plane(marked);
    for (size_t i = 0; i < yc.size(); ++i) ym[i] -= yc[i];
    return dft2(ym, clean.width, clean.height);
}

namespace {

// Band index of a bin under a partition of [0, sqrt(1/2)]; the last band is
// closed at the top so every bin is assigned.
int band_index(double rho, const std::vector<double>& edges) {
    const int n = static_cast<int>(edges.size()) - 1;
    for (int b = 0; b < n; ++b)
        if (rho < edges[static_cast<size_t>(b) + 1]) return b;
    return n - 1;
}

}  // namespace

BandEnergyReport suppression_profile(const Image& clean, const Image& marked,
                                     const Image& attacked,
                                     const std::vector<double>& edges,
                                     const std::optional<BlurParams>& blur) {
    require_same_geometry(clean, marked, "suppression_profile");
    require_same_geometry(clean, attacked, "suppression_profile");
    if (edges.size() < 2)
        fail(ErrorCategory::Config, "suppression_profile: need >= 2 band edges");
    for (size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            fail(ErrorCategory::Config,
                 "suppression_profile: band edges must be strictly increasing");

    const SpectralField fm = watermark_spectrum(clean, marked);
    const SpectralField fa = watermark_spectrum(clean, attacked);
    std::optional<SpectralField> h;
    if (blur) h = transfer_function(*blur, clean.width, clean.height);

    const int n = static_cast<int>(edges.size()) - 1;
    BandEnergyReport rep;
    rep.edges = edges;
    rep.bins.assign(static_cast<size_t>(n), 0);
    rep.energy_marked.assign(static_cast<size_t>(n), 0.0);
    rep.energy_attacked.assign(static_cast<size_t>(n), 0.0);
    // NaN marks "no value" (absent prediction, empty band); the CSV writer
    // renders it as an empty cell. 0.0 would be ambiguous with full suppression.
    const double kNone = std::numeric_limits<double>::quiet_NaN();
    rep.measured.assign(static_cast<size_t>(n), kNone);
    rep.predicted.assign(static_cast<size_t>(n), h ? 0.0 : kNone);
    rep.notes.assign(static_cast<size_t>(n), "");

    const int M = clean.width, N = clean.height;
    for (int l = 0; l < N; ++l) {
        const double v = static_cast<double>(fold_freq_index(l, N)) / N;
        for (int k = 0; k < M; ++k) {
            const double u = static_cast<double>(fold_freq_index(k, M)) / M;
            const double rho = std::sqrt(u * u + v * v);
            const auto b = static_cast<size_t>(band_index(rho, edges));
            rep.bins[b] += 1;
            rep.energy_marked[b] += std::norm(fm.at(k, l));
            rep.energy_attacked[b] += std::norm(fa.at(k, l));
            if (h) {
                const double hv = h->at(k, l).real();
                rep.predicted[b] += hv * hv;
            }
        }
    }
    for (int b = 0; b < n; ++b) {
        const auto bi = static_cast<size_t>(b);
        rep.total_marked += rep.energy_marked[bi];
        rep.total_attacked += rep.energy_attacked[bi];
        if (rep.bins[bi] == 0) {
            rep.notes[bi] = "skipped: no frequency bins in band";
            rep.predicted[bi] = kNone;
            continue;
        }
        if (h) rep.predicted[bi] /= static_cast<double>(rep.bins[bi]);
        if (rep.energy_marked[bi] > 0.0)
            rep.measured[bi] = rep.energy_attacked[bi] / rep.energy_marked[bi];
        else
            rep.notes[bi] = "skipped: no watermark energy in band";
    }
    return rep;
}

NoiseCheckReport noise_energy_check(double sigma, int M, int N, int trials,
                                    uint64_t seed) {
    if (M < 1 || N < 1) fail(ErrorCategory::Geometry, "noise_energy_check: bad dims");
    if (trials < 1) fail(ErrorCategory::Config, "noise_energy_check: trials >= 1");
    if (sigma < 0) fail(ErrorCategory::Config, "noise_energy_check: sigma >= 0");

    NoiseCheckReport rep;
    rep.sigma = sigma;
    rep.width = M;
    rep.height = N;
    rep.trials = trials;
    const double mn = static_cast<double>(M) * N;
    rep.target = sigma * sigma * mn;

    const size_t bins = static_cast<size_t>(M) * N;
    std::vector<double> acc(bins, 0.0);
    std::vector<double> field(bins);
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(t)));
        for (double& v : field) v = sigma * rng.next_gaussian();
        SpectralField f = dft2(field, M, N);
        for (size_t i = 0; i < bins; ++i) acc[i] += std::norm(f.coeffs[i]);
    }
    double grand = 0.0;
    for (size_t i = 0; i < bins; ++i) {
        acc[i] /= trials;
        grand += acc[i];
    }
    rep.grand_mean = grand / static_cast<double>(bins);
    rep.rel_error = rep.target > 0
                        ? std::abs(rep.grand_mean - rep.target) / rep.target
                        : std::abs(rep.grand_mean);

    // Per-bin |n_hat|^2 is Exp(target) at complex bins (variance target^2) and
    // target * chi^2_1 at the up-to-4 self-conjugate bins (variance 2*target^2).
    double worst = 0.0;
    if (rep.target > 0) {
        for (int l = 0; l < N; ++l)
            for (int k = 0; k < M; ++k) {
                const bool self_conj =
                    (k == 0 || 2 * k == M) && (l == 0 || 2 * l == N);
                const double var_factor = self_conj ? 2.0 : 1.0;
                const double se =
                    rep.target * std::sqrt(var_factor / trials);
                const double z =
                    std::abs(acc[static_cast<size_t>(l) * M + k] - rep.target) / se;
                worst = std::max(worst, z);
            }
    }
    rep.worst_z = worst;
    rep.pass = rep.rel_error <= 0.02 && rep.worst_z <= 6.0;
    return rep;
}

std::string band_report_csv(const BandEnergyReport& report) {
    std::ostringstream out;
    out << "band,rho_lo,rho_hi,bins,energy_marked,energy_attacked,measured,"
           "predicted,note\n";
    const size_t n = report.bins.size();
    for (size_t b = 0; b < n; ++b) {
        auto cell = [](double v) { return std::isnan(v) ? std::string() : format_num(v); };
        out << b << "," << format_num(report.edges[b]) << ","
            << format_num(report.edges[b + 1]) << "," << report.bins[b] << ","
            << format_num(report.energy_marked[b]) << ","
            << format_num(report.energy_attacked[b]) << ","
            << cell(report.measured[b]) << ","
            << cell(report.predicted[b]) << "," << report.notes[b]
            << "\n";
    }
    return out.str();
}

std::string band_report_svg(const BandEnergyReport& report,
                            const std::string& title) {
    PlotSpec spec;
    spec.title = title;
    spec.x_label = "radial frequency (band center)";
    spec.y_label = "energy ratio";
    PlotSeries measured, predicted;
    measured.label = "measured";
    predicted.label = "predicted |H|^2";
    bool have_pred = false;
    for (size_t b = 0; b < report.bins.size(); ++b) {
        if (report.bins[b] == 0 || report.energy_marked[b] <= 0.0) continue;
        const double center = 0.5 * (report.edges[b] + report.edges[b + 1]);
        measured.x.push_back(center);
        measured.y.push_back(report.measured[b]);
        if (std::isfinite(report.predicted[b])) {
            predicted.x.push_back(center);
            predicted.y.push_back(report.predicted[b]);
            have_pred = true;
        }
    }
    spec.series.push_back(std::move(measured));
    if (have_pred) spec.series.push_back(std::move(predicted));
    return render_line_plot(spec);
}

}  // namespace wmb
