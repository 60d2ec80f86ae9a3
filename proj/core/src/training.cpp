#include "cudi/training.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "cudi/curve.hpp"
#include "cudi/exposure_map.hpp"

namespace cudi {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t init_seed(std::uint64_t run_seed, std::uint64_t salt) { return splitmix64(run_seed ^ salt); }

constexpr std::uint64_t kTeacherSalt = 0x7465616368657221ULL;
constexpr std::uint64_t kStudentSalt = 0x73747564656e7421ULL;

void check_finite(double v, std::uint64_t seed, std::size_t step, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " became non-finite at step " + std::to_string(step) +
                       " (batch seed " + std::to_string(seed) + ")");
  }
}

std::size_t pick(std::mt19937_64& rng, std::size_t count) {
  return std::min(count - 1, static_cast<std::size_t>(static_cast<double>(rng() >> 11) * 0x1.0p-53 *
                                                      static_cast<double>(count)));
}

}  // namespace

TrainConfig TrainConfig::desk_scale() {
  TrainConfig cfg;
  cfg.patch = 64;
  cfg.teacher = TeacherConfig::desk_scale();
  return cfg;
}

void TrainConfig::validate() const {
  if (patch == 0 || patch % loss.exposure_region != 0 || patch % student.downsample != 0) {
    throw ConfigError("patch size " + std::to_string(patch) + " must be a positive multiple of " +
                      std::to_string(loss.exposure_region) + " and " + std::to_string(student.downsample));
  }
  if (batch == 0) throw ConfigError("batch size must be positive");
  if (!(teacher_lr > 0.0) || !(student_lr > 0.0)) throw ConfigError("learning rates must be positive");
  teacher.channels();
}

std::uint64_t batch_seed(std::uint64_t run_seed, std::size_t step) {
  return splitmix64(splitmix64(run_seed) + static_cast<std::uint64_t>(step));
}

TrainingBatch sample_batch(const Corpus& corpus, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  validate_corpus(corpus, cfg.patch);
  const std::size_t p = cfg.patch;
  const std::size_t plane = p * p;
  TrainingBatch out{DenseArray(Shape{cfg.batch, 3, p, p}), DenseArray(Shape{cfg.batch, 1, p, p})};
  std::mt19937_64 rng(seed);
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const Image& src = corpus.images[pick(rng, corpus.size())];
    const std::size_t top = pick(rng, src.height() - p + 1);
    const std::size_t left = pick(rng, src.width() - p + 1);
    float* dst = out.images.raw() + b * 3 * plane;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < p; ++y) {
        for (std::size_t x = 0; x < p; ++x) dst[(c * p + y) * p + x] = src.at(c, top + y, left + x);
      }
    }
    const ExposureMap map = sample_training_map(p, p, rng());
    std::copy_n(map.array().raw(), plane, out.maps.raw() + b * plane);
  }
  return out;
}

TeacherRun train_teacher(const Corpus& corpus, const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  validate_corpus(corpus, cfg.patch);
  TeacherRun run{TeacherNet(cfg.teacher), {}};
  run.net.init_weights(init_seed(cfg.seed, kTeacherSalt), cfg.init);
  AdamState adam = AdamState::for_params(run.net.parameters(), AdamConfig{cfg.teacher_lr});
  const std::size_t n = cfg.teacher.iterations;
  run.trace.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::uint64_t seed = batch_seed(cfg.seed, step);
    const TrainingBatch batch = sample_batch(corpus, cfg, seed);
    Graph<float> g;
    const auto bound = run.net.bind(g, true);
    const Var image = g.constant(batch.images);
    const Var emap = g.constant(batch.maps);
    const Var params = run.net.forward(g, image, emap, bound);
    const Var result = curve::high_order(g, image, params);
    const TeacherLossTerms terms = losses::teacher_total(g, result, image, emap, params, n, cfg.loss);
    TeacherTraceRow row{step, g.scalar(terms.total), g.scalar(terms.exposure), g.scalar(terms.consistency),
                        g.scalar(terms.color), g.scalar(terms.smoothness)};
    check_finite(row.total, seed, step, "teacher loss");
    g.backward(terms.total);
    const auto grads = run.net.gradients(g, bound);
    adam_step(run.net.parameters(), grads, adam);
    run.trace.push_back(row);
    if (progress) progress(step, row.total);
  }
  return run;
}

DenseArray teacher_curve_output(const TeacherNet& teacher, const DenseArray& images, const DenseArray& maps) {
  const DenseArray params = teacher.predict_batch(images, maps);
  Graph<float> g(false);
  return g.value(curve::high_order(g, g.constant(images), g.constant(params)));
}

DenseArray student_tangent_output(const StudentNet& student, const DenseArray& images, const DenseArray& maps) {
  Graph<float> g(false);
  const auto bound = student.bind(g, false);
  const Var image = g.constant(images);
  const StudentOutputs out = student.forward(g, image, g.constant(maps), bound);
  return g.value(curve::tangent_line(g, image, out.slope, out.intercept));
}

StudentRun distill_student(const TeacherNet& teacher, const Corpus& corpus, const TrainConfig& cfg,
                           const ProgressFn& progress) {
  cfg.validate();
  validate_corpus(corpus, cfg.patch);
  StudentRun run{StudentNet(cfg.student), {}};
  run.net.init_weights(init_seed(cfg.seed, kStudentSalt), cfg.init);
  AdamState adam = AdamState::for_params(run.net.parameters(), AdamConfig{cfg.student_lr});
  run.trace.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::uint64_t seed = batch_seed(cfg.seed, step);
    const TrainingBatch batch = sample_batch(corpus, cfg, seed);
    const DenseArray target = teacher_curve_output(teacher, batch.images, batch.maps);
    Graph<float> g;
    const auto bound = run.net.bind(g, true);
    const Var image = g.constant(batch.images);
    const StudentOutputs out = run.net.forward(g, image, g.constant(batch.maps), bound);
    const Var pred = curve::tangent_line(g, image, out.slope, out.intercept);
    const Var loss = losses::distill_l1(g, pred, g.constant(target));
    const double l1 = g.scalar(loss);
    check_finite(l1, seed, step, "distillation loss");
    g.backward(loss);
    const auto grads = run.net.gradients(g, bound);
    adam_step(run.net.parameters(), grads, adam);
    run.trace.push_back({step, l1});
    if (progress) progress(step, l1);
  }
  return run;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out.precision(9);
  return out;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const std::vector<TeacherTraceRow>& trace) {
  auto out = open_csv(path);
  out << "step,total,sec,sc,cc,is\n";
  for (const auto& r : trace) {
    out << r.step << ',' << r.total << ',' << r.sec << ',' << r.sc << ',' << r.cc << ',' << r.is << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<StudentTraceRow>& trace) {
  auto out = open_csv(path);
  out << "step,l1\n";
  for (const auto& r : trace) out << r.step << ',' << r.l1 << '\n';
}

}  // namespace cudi
