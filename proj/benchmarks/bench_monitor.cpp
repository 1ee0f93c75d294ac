#include "signmon/contour.hpp"
#include "signmon/image.hpp"
#include "signmon/monitor.hpp"
#include "signmon/png_io.hpp"
#include "signmon/scenegen.hpp"

#include <benchmark/benchmark.h>

using namespace signmon;

namespace {

// One mid-sized scene with an Sh1 pasted dead center; the fixture every
// benchmark cuts its inputs from.
const Scene& fixture_scene() {
    static const Scene scene = [] {
        const Image bg = make_background(640, 480, 7);
        std::vector<SignTemplate> tpl;
        tpl.push_back(render_sign(SignClass::Sh1, 206, 11));
        return compose_scene(bg, tpl, 1, 13);
    }();
    return scene;
}

Certificate fixture_certificate() {
    const Scene& scene = fixture_scene();
    Certificate cert;
    cert.image = encode_png(scene.image);
    cert.claimed_class = scene.truths[0].cls;
    cert.bbox = scene.truths[0].bbox;
    return cert;
}

void BM_check_certificate(benchmark::State& state) {
    const Certificate cert = fixture_certificate();
    const ToleranceConfig cfg;
    for (auto _ : state) {
        const MonitorVerdict v = check_certificate(cert, cfg);
        benchmark::DoNotOptimize(v.accepted);
    }
}
BENCHMARK(BM_check_certificate)->Unit(benchmark::kMicrosecond);

void BM_check_image(benchmark::State& state) {
    const Scene& scene = fixture_scene();
    const ToleranceConfig cfg;
    for (auto _ : state) {
        const MonitorVerdict v =
            check_image(scene.image, scene.truths[0].cls, scene.truths[0].bbox, cfg);
        benchmark::DoNotOptimize(v.accepted);
    }
}
BENCHMARK(BM_check_image)->Unit(benchmark::kMicrosecond);

void BM_binarize_otsu(benchmark::State& state) {
    const Image crop = crop_normalized(fixture_scene().image, fixture_scene().truths[0].bbox);
    const Image gray = to_grayscale(resize_bilinear(crop, 206, 206));
    for (auto _ : state) {
        auto [t, bin] = binarize_otsu(gray);
        benchmark::DoNotOptimize(t);
        benchmark::DoNotOptimize(bin.bits.data());
    }
}
BENCHMARK(BM_binarize_otsu)->Unit(benchmark::kMicrosecond);

void BM_detect_contours(benchmark::State& state) {
    const Image crop = crop_normalized(fixture_scene().image, fixture_scene().truths[0].bbox);
    const Image gray = to_grayscale(resize_bilinear(crop, 206, 206));
    const auto [t, bin] = binarize_otsu(gray);
    for (auto _ : state) {
        const auto contours = detect_contours(bin);
        benchmark::DoNotOptimize(contours.size());
    }
}
BENCHMARK(BM_detect_contours)->Unit(benchmark::kMicrosecond);

void BM_resize_bilinear(benchmark::State& state) {
    const Image crop = crop_normalized(fixture_scene().image, fixture_scene().truths[0].bbox);
    for (auto _ : state) {
        const Image sized = resize_bilinear(crop, 206, 206);
        benchmark::DoNotOptimize(sized.pixels.data());
    }
}
BENCHMARK(BM_resize_bilinear)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
