// Acceptance run: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "../gradient_cases.hpp"
#include "cudi/bench.hpp"
#include "cudi/checkpoint.hpp"
#include "cudi/corpus.hpp"
#include "cudi/exposure_map.hpp"
#include "cudi/image_io.hpp"
#include "cudi/metrics.hpp"
#include "cudi/service.hpp"
#include "cudi/training.hpp"

namespace fs = std::filesystem;
using namespace cudi;

namespace {

// Pinned tolerances.
constexpr std::size_t kCurveSamples = 10'000;
constexpr double kTangencyTol = 1e-5;
constexpr double kRemainderSafety = 2.0;  // C is fitted once, then doubled
constexpr double kRemainderFloor = 1e-6;  // float evaluation noise
constexpr double kHandTol = 1e-6;
constexpr double kFlopRatio = 16.0;
constexpr double kFlopRatioTol = 0.1;
constexpr double kRuntimeGap = 4.0;
constexpr std::size_t kRuntimeSize = 2048;
constexpr std::size_t kRuntimeReps = 5;
constexpr double kRegionErrorMax = 0.1;
constexpr float kControlExposure = 0.65f;
constexpr double kMonotoneSlack = 0.02;
constexpr double kDistillL1Max = 0.05;
constexpr double kDistillPccMin = 0.95;
constexpr std::size_t kDeterminismSteps = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  fs::path work = "acceptance_work";
  std::size_t teacher_steps = 2000;
  std::size_t student_steps = 3000;
  std::size_t corpus_size = 50;
  std::size_t corpus_edge = 96;
  double exposure_spread = 1.5;
  std::uint64_t seed = 7;
  std::string only;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<float> uniform_values(std::mt19937_64& rng, std::size_t n, float lo, float hi) {
  std::vector<float> v(n);
  for (float& x : v) x = lo + (hi - lo) * static_cast<float>(static_cast<double>(rng() >> 11) * 0x1.0p-53);
  return v;
}

Image random_image(std::mt19937_64& rng, std::size_t h, std::size_t w, float lo = 0.0f, float hi = 1.0f) {
  return Image(DenseArray(Shape{3, h, w}, uniform_values(rng, 3 * h * w, lo, hi)));
}

CurveParamStack random_params(std::mt19937_64& rng, std::size_t n, std::size_t h, std::size_t w) {
  return CurveParamStack(DenseArray(Shape{n, 3, h, w}, uniform_values(rng, n * 3 * h * w, -1.0f, 1.0f)));
}

Outcome curve_closure() {
  std::mt19937_64 rng(2024);
  std::size_t out_of_range = 0, non_monotone = 0;
  for (std::size_t s = 0; s < kCurveSamples; ++s) {
    const Image lo = random_image(rng, 4, 4);
    Image hi = lo;
    const auto bump = uniform_values(rng, hi.array().size(), 0.0f, 0.5f);
    for (std::size_t i = 0; i < bump.size(); ++i) hi.array()[i] = std::min(1.0f, hi.array()[i] + bump[i]);
    const CurveParamStack params = random_params(rng, kDefaultCurveIterations, 4, 4);
    const Image a = apply_high_order(lo, params);
    const Image b = apply_high_order(hi, params);
    for (std::size_t i = 0; i < a.array().size(); ++i) {
      if (!(a.array()[i] >= 0.0f && a.array()[i] <= 1.0f && b.array()[i] >= 0.0f && b.array()[i] <= 1.0f)) {
        ++out_of_range;
      }
      if (b.array()[i] < a.array()[i]) ++non_monotone;
    }
  }
  return {out_of_range == 0 && non_monotone == 0,
          fmt("%zu samples, %zu out of [0,1], %zu monotonicity violations", kCurveSamples, out_of_range, non_monotone)};
}

// Largest |K (I+d) + B - LE_n(I+d)| / d^2 over the grid of offsets.
double remainder_constant(const Image& image, const CurveParamStack& params, const TangentMaps& tangent,
                          double floor_noise, double bound_c, std::size_t* violations) {
  static constexpr double kOffsets[] = {-0.05, -0.03, -0.01, 0.01, 0.03, 0.05};
  double c_max = 0.0;
  for (double d : kOffsets) {
    Image moved = image;
    for (float& v : moved.array().values()) v = static_cast<float>(v + d);
    const Image curve = apply_high_order(moved, params);
    const Image line = apply_tangent(moved, tangent, false);
    for (std::size_t i = 0; i < curve.array().size(); ++i) {
      const double err = std::abs(static_cast<double>(line.array()[i]) - curve.array()[i]);
      c_max = std::max(c_max, (err - floor_noise) / (d * d));
      if (violations != nullptr && err > bound_c * d * d + floor_noise) ++*violations;
    }
  }
  return c_max;
}

Outcome tangent_oracle() {
  double worst_tangency = 0.0;
  auto sample = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Image im = random_image(rng, 16, 16, 0.05f, 0.95f);
    CurveParamStack p = random_params(rng, kDefaultCurveIterations, 16, 16);
    return std::pair{std::move(im), std::move(p)};
  };
  double c_fit = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto [im, p] = sample(s);
    c_fit = std::max(c_fit, remainder_constant(im, p, analytic_tangent(im, p), kRemainderFloor, 0.0, nullptr));
  }
  const double bound = kRemainderSafety * c_fit;
  std::size_t violations = 0;
  double c_lo = 1e300, c_hi = 0.0;
  for (std::uint64_t s = 1000; s < 1100; ++s) {
    const auto [im, p] = sample(s);
    const TangentMaps t = analytic_tangent(im, p);
    const Image curve = apply_high_order(im, p);
    const Image line = apply_tangent(im, t, false);
    for (std::size_t i = 0; i < curve.array().size(); ++i) {
      worst_tangency = std::max(worst_tangency, std::abs(static_cast<double>(line.array()[i]) - curve.array()[i]));
    }
    const double c = remainder_constant(im, p, t, kRemainderFloor, bound, &violations);
    c_lo = std::min(c_lo, c);
    c_hi = std::max(c_hi, c);
  }
  return {worst_tangency <= kTangencyTol && violations == 0,
          fmt("max tangency gap %.2e (<= %.0e); C fitted %.3f, bound %.3f, per-seed C in [%.3f, %.3f], %zu violations",
              worst_tangency, kTangencyTol, c_fit, bound, c_lo, c_hi, violations)};
}

Outcome gradient_suite() {
  using namespace cudi::testing;
  std::size_t failed = 0, total = 0;
  double worst_simple = 0.0, worst_composed = 0.0;
  std::string failures;
  auto run = [&](const GradCase& c, double& worst) {
    const double e = c.error();
    worst = std::max(worst, e);
    ++total;
    if (!(e <= c.tolerance)) {
      ++failed;
      failures += " " + c.name + fmt("=%.2e", e);
    }
  };
  for (const GradCase& c : op_grad_cases()) run(c, worst_simple);
  for (const GradCase& c : loss_grad_cases()) run(c, worst_simple);
  TeacherNet net{TeacherConfig{0.125, kDefaultCurveIterations}};
  net.init_weights(5, InitScheme::fixed);
  for (const GradCase& c : composed_teacher_cases(net)) run(c, worst_composed);
  return {failed == 0, fmt("%zu/%zu checks pass; worst op/loss %.2e (<= 1e-3), worst composed teacher %.2e (<= 1e-2)",
                           total - failed, total, worst_simple, worst_composed) +
                           failures};
}

Outcome hand_losses() {
  using T = Tensor<double>;
  Graph<double> g(false);
  auto c = [&](Shape s, double v) { return g.constant(T(std::move(s), v)); };
  std::vector<std::pair<double, double>> got;

  got.emplace_back(g.scalar(losses::spatial_exposure_control(g, c({1, 3, 16, 16}, 0.7), c({1, 1, 16, 16}, 0.5))), 0.2);

  T input({1, 3, 4, 8}, 0.2);
  T result = input;
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 4; x < 8; ++x) result.at(0, ch, y, x) = 0.6;
  got.emplace_back(g.scalar(losses::spatial_consistency(g, g.constant(result), g.constant(input))), 0.16);

  T colors({1, 3, 2, 2});
  const double means[3] = {0.5, 0.3, 0.1};
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t i = 0; i < 4; ++i) colors[ch * 4 + i] = means[ch];
  got.emplace_back(g.scalar(losses::color_constancy(g, g.constant(colors))), 0.24);

  T maps({1, 3, 2, 2}, 0.0);
  maps[1] = 1.0;
  maps[3] = 1.0;
  got.emplace_back(g.scalar(losses::illumination_smoothness(g, g.constant(maps), 1)), 4.0);

  got.emplace_back(g.scalar(losses::distill_l1(g, g.constant(T({2}, std::vector<double>{0.2, 0.8})),
                                               g.constant(T({2}, std::vector<double>{0.3, 0.6})))),
                   0.15);

  bool ok = true;
  std::string detail;
  for (const auto& [value, expected] : got) {
    ok = ok && std::abs(value - expected) <= kHandTol;
    detail += fmt(" %.9g (want %g)", value, expected);
  }
  return {ok, "sec/sc/cc/is/l1:" + detail};
}

Outcome flop_ratio() {
  const double ratio = static_cast<double>(count_flops(KernelKind::iterative, 2048, 2048, 8)) /
                       static_cast<double>(count_flops(KernelKind::linear, 2048, 2048));
  const double paper_a = 1.699 / 0.106;
  const double paper_b = 6.796 / 0.425;
  const bool ok = std::abs(ratio - kFlopRatio) <= 1e-12 && std::abs(ratio - paper_a) <= kFlopRatioTol &&
                  std::abs(ratio - paper_b) <= kFlopRatioTol;
  return {ok, fmt("iterative/linear = %.4f; published ratios %.3f and %.3f (tolerance %.1f)", ratio, paper_a, paper_b,
                  kFlopRatioTol)};
}

Outcome runtime_gap() {
  const BenchResult it = time_op(KernelKind::iterative, kRuntimeSize, kRuntimeSize, kRuntimeReps, 1);
  const BenchResult li = time_op(KernelKind::linear, kRuntimeSize, kRuntimeSize, kRuntimeReps, 1);
  const double gap = static_cast<double>(it.median_ns) / static_cast<double>(li.median_ns);
  return {gap >= kRuntimeGap, fmt("2048x2048, 1 thread: iterative %.2f ms, linear %.2f ms, gap %.2fx (>= %.0fx)",
                                  it.median_ns / 1e6, li.median_ns / 1e6, gap, kRuntimeGap)};
}

template <typename Row, typename Fn>
std::pair<double, double> decile_means(const std::vector<Row>& trace, Fn value) {
  const std::size_t k = std::max<std::size_t>(1, trace.size() / 10);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    first += value(trace[i]);
    last += value(trace[trace.size() - k + i]);
  }
  return {first / static_cast<double>(k), last / static_cast<double>(k)};
}

Image held_out_underexposed() { return underexpose(synthetic_image(128, 128, 1'000'001)); }

struct Shared {
  Settings settings;
  Corpus corpus;
  std::optional<TeacherNet> teacher;
  std::optional<StudentNet> student;
  std::vector<std::uint8_t> teacher_bytes_before_distill;
  std::vector<std::uint8_t> teacher_bytes_after_distill;

  TrainConfig config(std::size_t steps) const {
    TrainConfig cfg = TrainConfig::desk_scale();
    cfg.steps = steps;
    cfg.seed = settings.seed;
    return cfg;
  }
};

Outcome desk_step1(Shared& sh) {
  const auto t0 = std::chrono::steady_clock::now();
  TeacherRun run = train_teacher(sh.corpus, sh.config(sh.settings.teacher_steps));
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  fs::create_directories(sh.settings.work);
  save_checkpoint(sh.settings.work / "teacher.ckpt", run.net);
  write_trace_csv(sh.settings.work / "teacher.trace.csv", run.trace);

  const auto [first, last] = decile_means(run.trace, [](const TeacherTraceRow& r) { return r.total; });
  const Image held = held_out_underexposed();
  auto run_at = [&](float e) {
    const ExposureMap m = uniform_map(e, held.height(), held.width());
    return apply_high_order(held, run.net.predict(held, m));
  };
  const Image at_control = run_at(kControlExposure);
  const double rme = region_mean_error(at_control, uniform_map(kControlExposure, held.height(), held.width()));
  const double m3 = run_at(0.3f).mean(), m5 = run_at(0.5f).mean(), m7 = run_at(0.7f).mean();
  const bool monotone = m5 >= m3 - kMonotoneSlack && m7 >= m5 - kMonotoneSlack;
  sh.teacher = std::move(run.net);
  return {last < first && rme <= kRegionErrorMax && monotone,
          fmt("%zu steps in %.1f min; loss first/last decile %.4f/%.4f; held-out (mean %.3f) region error at E=0.65 "
              "%.4f (<= %.2f); mean brightness at E=0.3/0.5/0.7 = %.4f/%.4f/%.4f (slack %.2f)",
              sh.settings.teacher_steps, minutes, first, last, held.mean(), rme, kRegionErrorMax, m3, m5, m7,
              kMonotoneSlack)};
}

Image batch_item(const DenseArray& batch, std::size_t index) { return Image(unstack(batch, index)); }

Outcome desk_step2(Shared& sh) {
  if (!sh.teacher) return {false, "no teacher (step 1 did not run)"};
  const auto t0 = std::chrono::steady_clock::now();
  sh.teacher_bytes_before_distill = encode_checkpoint(*sh.teacher);
  StudentRun run = distill_student(*sh.teacher, sh.corpus, sh.config(sh.settings.student_steps));
  sh.teacher_bytes_after_distill = encode_checkpoint(*sh.teacher);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  save_checkpoint(sh.settings.work / "student.ckpt", run.net);
  write_trace_csv(sh.settings.work / "student.trace.csv", run.trace);
  const auto [first, last] = decile_means(run.trace, [](const StudentTraceRow& r) { return r.l1; });

  // Held-out: unseen generator seeds, normal and underexposed, training-style and uniform maps.
  double l1_sum = 0.0, pcc_sum = 0.0, pcc_min = 1.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    Image im = synthetic_image(128, 128, 2'000'000 + s);
    if (s % 2 == 1) im = underexpose(im);
    const ExposureMap m = s < 4 ? sample_training_map(128, 128, 3'000'000 + s) : uniform_map(kControlExposure, 128, 128);
    const DenseArray images = stack_images({&im, 1});
    const DenseArray maps = stack_maps({&m, 1});
    const Image teacher_out = batch_item(teacher_curve_output(*sh.teacher, images, maps), 0);
    const Image student_out = batch_item(student_tangent_output(run.net, images, maps), 0);
    l1_sum += mean_abs_error(student_out, teacher_out);
    const double r = pcc(student_out, teacher_out);
    pcc_sum += r;
    pcc_min = std::min(pcc_min, r);
    ++count;
  }
  const double l1 = l1_sum / static_cast<double>(count);
  const double r = pcc_sum / static_cast<double>(count);
  sh.student = std::move(run.net);
  return {last < first && l1 <= kDistillL1Max && r >= kDistillPccMin,
          fmt("%zu steps in %.1f min; L1 first/last decile %.4f/%.4f; held-out L1 %.4f (<= %.2f); PCC mean %.4f, "
              "min %.4f (>= %.2f; full-scale reference 0.998)",
              sh.settings.student_steps, minutes, first, last, l1, kDistillL1Max, r, pcc_min, kDistillPccMin)};
}

Outcome invariants(Shared& sh) {
  std::vector<std::string> broken;
  if (sh.teacher_bytes_before_distill.empty()) {
    broken.push_back("frozen-teacher check needs step 2");
  } else if (sh.teacher_bytes_before_distill != sh.teacher_bytes_after_distill) {
    broken.push_back("teacher changed during distillation");
  }

  const TrainConfig cfg = sh.config(kDeterminismSteps);
  const TeacherRun t1 = train_teacher(sh.corpus, cfg);
  const TeacherRun t2 = train_teacher(sh.corpus, cfg);
  if (encode_checkpoint(t1.net) != encode_checkpoint(t2.net)) broken.push_back("teacher runs differ");
  const StudentRun s1 = distill_student(t1.net, sh.corpus, cfg);
  const StudentRun s2 = distill_student(t1.net, sh.corpus, cfg);
  if (encode_checkpoint(s1.net) != encode_checkpoint(s2.net)) broken.push_back("student runs differ");

  const fs::path dir = sh.settings.work;
  fs::create_directories(dir);
  save_checkpoint(dir / "roundtrip_teacher.ckpt", t1.net);
  save_checkpoint(dir / "roundtrip_student.ckpt", s1.net);
  const TeacherNet t_back = load_teacher(dir / "roundtrip_teacher.ckpt");
  const StudentNet s_back = load_student(dir / "roundtrip_student.ckpt");
  if (t_back.flatten() != t1.net.flatten() || encode_checkpoint(t_back) != encode_checkpoint(t1.net)) {
    broken.push_back("teacher round trip");
  }
  if (s_back.flatten() != s1.net.flatten() || encode_checkpoint(s_back) != encode_checkpoint(s1.net)) {
    broken.push_back("student round trip");
  }
  const Image probe = held_out_underexposed();
  const ExposureMap m = uniform_map(kControlExposure, probe.height(), probe.width());
  if (!(apply_high_order(probe, t_back.predict(probe, m)) == apply_high_order(probe, t1.net.predict(probe, m)))) {
    broken.push_back("teacher outputs after reload");
  }
  if (!(s_back.predict(probe, m).slope == s1.net.predict(probe, m).slope)) broken.push_back("student outputs after reload");

  std::string detail = fmt("frozen teacher, two %zu-step runs per network, save/load of both roles", kDeterminismSteps);
  for (const auto& b : broken) detail += "; BROKEN: " + b;
  return {broken.empty(), detail};
}

Outcome headless_service(Shared& sh) {
  StudentNet fallback;
  fallback.init_weights(1);
  const bool trained = sh.student.has_value();
  AdjustService service(trained ? Model(*sh.student) : Model(fallback));
  const int port = service.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(120);
  const auto health = client.Get("/v1/health");
  const Image im = held_out_underexposed();
  const auto png = encode_png(im);
  httplib::MultipartFormDataItems form{{"image", std::string(png.begin(), png.end()), "in.png", "image/png"},
                                       {"engine", "student", "", ""},
                                       {"exposure_mode", "uniform", "", ""},
                                       {"exposure_value", "0.65", "", ""}};
  const auto res = client.Post("/v1/adjust", form);
  service.stop();
  const bool health_ok = health && health->status == 200;
  const bool adjust_ok = res && res->status == 200 && res->get_header_value("Content-Type") == "image/png";
  double brightness = -1.0;
  if (adjust_ok) brightness = nlohmann::json::parse(res->get_header_value("X-CuDi-Stats"))["mean_brightness"];
  const bool ui_absent = !fs::exists(fs::path(CUDI_SOURCE_DIR) / "studio-ui");
  return {health_ok && adjust_ok,
          fmt("in-process HTTP service on port %d (%s student): health %s, adjust %s, output mean %.3f vs input %.3f; "
              "studio-ui %s",
              port, trained ? "trained" : "untrained", health_ok ? "200" : "failed", adjust_ok ? "200 image/png" : "failed",
              brightness, im.mean(), ui_absent ? "absent" : "present (unused)")};
}

}  // namespace

int main(int argc, char** argv) {
  Settings st;
  CLI::App app{"Primary acceptance criteria"};
  app.add_option("--work", st.work, "directory for checkpoints and traces")->capture_default_str();
  app.add_option("--teacher-steps", st.teacher_steps, "desk-scale teacher steps")->capture_default_str();
  app.add_option("--student-steps", st.student_steps, "desk-scale student steps")->capture_default_str();
  app.add_option("--corpus-size", st.corpus_size, "synthetic corpus images")->capture_default_str();
  app.add_option("--exposure-spread", st.exposure_spread, "corpus gamma spread in stops")->capture_default_str();
  app.add_option("--seed", st.seed, "training seed")->capture_default_str();
  app.add_option("--only", st.only, "comma-separated criterion ids to run");
  CLI11_PARSE(app, argc, argv);

  Shared sh{st, synthetic_corpus(st.corpus_size, st.corpus_edge, st.corpus_edge, 1, st.exposure_spread)};
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"curve-closure", curve_closure},
      {"tangent-oracle", tangent_oracle},
      {"gradient-suite", gradient_suite},
      {"hand-losses", hand_losses},
      {"flop-ratio", flop_ratio},
      {"runtime-gap", runtime_gap},
      {"desk-step1", [&] { return desk_step1(sh); }},
      {"desk-step2", [&] { return desk_step2(sh); }},
      {"invariants", [&] { return invariants(sh); }},
      {"headless", [&] { return headless_service(sh); }},
  };

  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!st.only.empty() && ("," + st.only + ",").find("," + id + ",") == std::string::npos) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), sec, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
