#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "wmbench/attack.hpp"
#include "wmbench/corpus.hpp"
#include "wmbench/degrade.hpp"
#include "wmbench/harness.hpp"
#include "wmbench/image.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/restore.hpp"
#include "wmbench/spectral.hpp"
#include "wmbench/watermark.hpp"

namespace py = pybind11;
using namespace wmb;

namespace {

// numpy (H, W) or (H, W, C) float array <-> Image (samples stored per plane)
Image image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    auto buf = arr.request();
    Image img;
    if (buf.ndim == 2) {
        img.height = static_cast<int>(buf.shape[0]);
        img.width = static_cast<int>(buf.shape[1]);
        img.channels = 1;
    } else if (buf.ndim == 3) {
        img.height = static_cast<int>(buf.shape[0]);
        img.width = static_cast<int>(buf.shape[1]);
        img.channels = static_cast<int>(buf.shape[2]);
    } else {
        fail(ErrorCategory::Geometry, "expected a (H, W) or (H, W, C) array");
    }
    const double* data = static_cast<const double*>(buf.ptr);
    img.samples.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                img.at(c, y, x) =
                    data[(static_cast<size_t>(y) * img.width + x) * img.channels + c];
    validate(img, "array input");
    return img;
}

py::array_t<double> array_from_image(const Image& img) {
    py::array_t<double> arr;
    if (img.channels == 1) {
        arr = py::array_t<double>({img.height, img.width});
        auto buf = arr.request();
        double* data = static_cast<double*>(buf.ptr);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                data[static_cast<size_t>(y) * img.width + x] = img.at(0, y, x);
    } else {
        arr = py::array_t<double>({img.height, img.width, img.channels});
        auto buf = arr.request();
        double* data = static_cast<double*>(buf.ptr);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c)
                    data[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
                        img.at(c, y, x);
    }
    return arr;
}

std::vector<uint8_t> bits_from_list(const std::vector<int>& bits) {
    std::vector<uint8_t> out;
    out.reserve(bits.size());
    for (int b : bits) {
        if (b != 0 && b != 1) fail(ErrorCategory::Config, "payload bits must be 0 or 1");
        out.push_back(static_cast<uint8_t>(b));
    }
    return out;
}

py::dict detection_dict(const DetectionResult& det) {
    py::dict d;
    d["bit_accuracy"] = det.bit_accuracy;
    d["correlation"] = det.correlation;
    d["decision"] = det.decision;
    d["threshold"] = det.threshold;
    std::vector<int> bits(det.bits.begin(), det.bits.end());
    d["bits"] = bits;
    return d;
}

SpreadSpectrumKey make_ss_key(uint64_t seed, const std::vector<int>& payload, double gamma) {
    SpreadSpectrumKey key;
    key.seed = seed;
    key.payload = bits_from_list(payload);
    key.gamma = gamma;
    return key;
}

}  // namespace

PYBIND11_MODULE(_wmbench, m) {
    m.doc() = "watermark robustness bench: embedding, attacks, restoration, metrics";
    m.attr("__version__") = kToolkitVersion;

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            std::string msg = std::string("[") + to_string(e.category()) + "] " + e.what();
            PyErr_SetString(PyExc_ValueError, msg.c_str());
        }
    });

    m.def("random_payload",
          [](int nbits, uint64_t seed) {
              std::vector<uint8_t> bits = random_payload(nbits, seed);
              return std::vector<int>(bits.begin(), bits.end());
          },
          py::arg("nbits"), py::arg("seed"));

    m.def("ss_embed",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, uint64_t seed,
             const std::vector<int>& payload, double gamma) {
              EmbedResult r = embed_ss(image_from_array(img), make_ss_key(seed, payload, gamma));
              return py::make_tuple(array_from_image(r.image), r.clamped_fraction);
          },
          py::arg("image"), py::arg("seed"), py::arg("payload"), py::arg("gamma") = 4.0);

    m.def("ss_detect",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, uint64_t seed,
             const std::vector<int>& payload, double gamma) {
              return detection_dict(
                  extract_ss(image_from_array(img), make_ss_key(seed, payload, gamma)));
          },
          py::arg("image"), py::arg("seed"), py::arg("payload"), py::arg("gamma") = 4.0);

    m.def("additive_embed",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, uint64_t seed,
             const std::vector<int>& payload, double alpha) {
              Image im = image_from_array(img);
              AdditivePattern wm =
                  make_additive_pattern(im.width, im.height, seed, bits_from_list(payload), alpha);
              EmbedResult r = embed_additive(im, wm);
              return py::make_tuple(array_from_image(r.image), r.clamped_fraction);
          },
          py::arg("image"), py::arg("seed"), py::arg("payload"), py::arg("alpha") = 0.02);

    m.def("additive_detect",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, uint64_t seed,
             const std::vector<int>& payload, double alpha,
             std::optional<py::array_t<double, py::array::c_style | py::array::forcecast>>
                 original) {
              Image im = image_from_array(img);
              AdditivePattern wm =
                  make_additive_pattern(im.width, im.height, seed, bits_from_list(payload), alpha);
              std::optional<Image> orig;
              if (original) orig = image_from_array(*original);
              return detection_dict(detect_additive(im, wm, orig ? &*orig : nullptr));
          },
          py::arg("image"), py::arg("seed"), py::arg("payload"), py::arg("alpha") = 0.02,
          py::arg("original") = std::nullopt);

    m.def("add_noise",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, double sigma,
             uint64_t seed) {
              NoiseParams p;
              p.sigma = sigma;
              p.seed = seed;
              return array_from_image(add_pixel_noise(image_from_array(img), p));
          },
          py::arg("image"), py::arg("sigma"), py::arg("seed") = 1);

    m.def("gaussian_blur",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, double sigma,
             int kernel_size, const std::string& mode) {
              BlurParams p;
              p.sigma = sigma;
              p.kernel_size = kernel_size;
              if (mode == "mirror") p.mode = BlurMode::Mirror;
              else if (mode == "periodic") p.mode = BlurMode::Periodic;
              else fail(ErrorCategory::Config, "mode must be 'mirror' or 'periodic'");
              return array_from_image(gaussian_blur(image_from_array(img), p));
          },
          py::arg("image"), py::arg("sigma"), py::arg("kernel_size") = 0,
          py::arg("mode") = "mirror");

    m.def("jpeg_cycle",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, int quality) {
              JpegParams p;
              p.quality = quality;
              return array_from_image(jpeg_cycle(image_from_array(img), p));
          },
          py::arg("image"), py::arg("quality"));

    m.def("restore_tv",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, double beta,
             int max_iters, double tol) {
              RestorationParams p;
              p.beta = beta;
              p.max_iters = max_iters;
              p.tol = tol;
              TvResult r = restore_tv(image_from_array(img), p);
              return py::make_tuple(array_from_image(r.image), r.objective, r.iterations,
                                    r.converged);
          },
          py::arg("image"), py::arg("beta") = 0.1, py::arg("max_iters") = 500,
          py::arg("tol") = 1e-5);

    m.def("restore_tikhonov",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, double beta) {
              RestorationParams p;
              p.beta = beta;
              return array_from_image(restore_tikhonov(image_from_array(img), p));
          },
          py::arg("image"), py::arg("beta") = 0.1);

    m.def("wiener_deconvolve",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img, double sigma,
             double nsr) {
              BlurParams blur;
              blur.sigma = sigma;
              blur.mode = BlurMode::Periodic;
              RestorationParams p;
              p.wiener_nsr = nsr;
              return array_from_image(wiener_deconvolve(image_from_array(img), blur, p));
          },
          py::arg("image"), py::arg("sigma"), py::arg("nsr") = 1e-3);

    m.def("run_attack",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img,
             const std::string& name, uint64_t seed,
             std::optional<std::vector<py::array_t<double, py::array::c_style |
                                                               py::array::forcecast>>>
                 latent_corpus) {
              AttackPipeline pipe = named_pipeline(name);
              pipe.seed = seed;
              std::optional<LatentCodec> codec;
              if (needs_latent_codec(pipe)) {
                  if (!latent_corpus)
                      fail(ErrorCategory::Config,
                           "attack '" + name + "' has a latent stage; pass latent_corpus=");
                  std::vector<Image> corpus;
                  for (const auto& a : *latent_corpus) corpus.push_back(image_from_array(a));
                  int d = 32;
                  for (const Stage& st : pipe.stages)
                      if (const auto* ls = std::get_if<LatentStage>(&st)) d = ls->d;
                  codec = fit_latent_codec(corpus, d);
              }
              return array_from_image(
                  run_attack(image_from_array(img), pipe, codec ? &*codec : nullptr));
          },
          py::arg("image"), py::arg("name"), py::arg("seed") = 1,
          py::arg("latent_corpus") = std::nullopt);

    m.def("attack_names", []() {
        std::vector<std::string> names;
        for (const AttackPipeline& p : distortion_pipelines()) names.push_back(p.name);
        for (const AttackPipeline& p : builtin_pipelines()) names.push_back(p.name);
        names.push_back("identity");
        return names;
    });

    m.def("psnr",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
             py::array_t<double, py::array::c_style | py::array::forcecast> b) {
              return psnr(image_from_array(a), image_from_array(b));
          },
          py::arg("a"), py::arg("b"));

    m.def("ssim",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
             py::array_t<double, py::array::c_style | py::array::forcecast> b) {
              return ssim(image_from_array(a), image_from_array(b));
          },
          py::arg("a"), py::arg("b"));

    m.def("noise_energy_check",
          [](double sigma, int width, int height, int trials, uint64_t seed) {
              NoiseCheckReport r = noise_energy_check(sigma, width, height, trials, seed);
              py::dict d;
              d["sigma"] = r.sigma;
              d["target"] = r.target;
              d["grand_mean"] = r.grand_mean;
              d["rel_error"] = r.rel_error;
              d["worst_z"] = r.worst_z;
              d["pass"] = r.pass;
              return d;
          },
          py::arg("sigma"), py::arg("width"), py::arg("height"), py::arg("trials"),
          py::arg("seed") = 1);

    m.def("make_corpus",
          [](int count, int width, int height, uint64_t seed) {
              CorpusParams p;
              p.count = count;
              p.width = width;
              p.height = height;
              p.seed = seed;
              std::vector<py::array_t<double>> out;
              for (int i = 0; i < count; ++i) out.push_back(array_from_image(make_corpus_image(p, i)));
              return out;
          },
          py::arg("count") = 8, py::arg("width") = 128, py::arg("height") = 128,
          py::arg("seed") = 2026);

    m.def("load_image", [](const std::string& path) { return array_from_image(load_image(path)); },
          py::arg("path"));
    m.def("save_image",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> img,
             const std::string& path) { save_image(image_from_array(img), path); },
          py::arg("image"), py::arg("path"));
}
