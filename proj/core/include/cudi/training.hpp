#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "cudi/corpus.hpp"
#include "cudi/losses.hpp"
#include "cudi/networks.hpp"
#include "cudi/optim.hpp"

namespace cudi {

struct TrainConfig {
  std::size_t patch = 256;
  std::size_t batch = 8;
  double teacher_lr = kTeacherLearningRate;
  double student_lr = kStudentLearningRate;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::filesystem::path corpus_dir;
  TeacherConfig teacher;
  StudentConfig student;
  LossConfig loss{.smoothness_norm = SmoothnessNorm::mean};
  InitScheme init = InitScheme::he;

  /// 64x64 patches, teacher width 0.25.
  static TrainConfig desk_scale();

  /// ConfigError unless patch is a positive multiple of 16 and of the
  /// student downsample factor, and batch > 0.
  void validate() const;
};

struct TrainingBatch {
  DenseArray images;  // (B,3,P,P)
  DenseArray maps;    // (B,1,P,P)
};

/// Uniformly random image + random crop per item, paired with a random
/// two-value map. Deterministic per seed.
TrainingBatch sample_batch(const Corpus& corpus, const TrainConfig& cfg, std::uint64_t seed);

/// Seed of the batch drawn at `step` of a run seeded with `run_seed`.
std::uint64_t batch_seed(std::uint64_t run_seed, std::size_t step);

struct TeacherTraceRow {
  std::size_t step = 0;
  double total = 0, sec = 0, sc = 0, cc = 0, is = 0;
};

struct StudentTraceRow {
  std::size_t step = 0;
  double l1 = 0;
};

struct TeacherRun {
  TeacherNet net;
  std::vector<TeacherTraceRow> trace;
};

struct StudentRun {
  StudentNet net;
  std::vector<StudentTraceRow> trace;
};

/// Called after every step with (step, total loss).
using ProgressFn = std::function<void(std::size_t, double)>;

/// Zero-reference teacher training. Throws NumericError naming the batch
/// seed when a loss turns non-finite.
TeacherRun train_teacher(const Corpus& corpus, const TrainConfig& cfg, const ProgressFn& progress = {});

/// Student training against the frozen teacher's curve output (L1).
StudentRun distill_student(const TeacherNet& teacher, const Corpus& corpus, const TrainConfig& cfg,
                           const ProgressFn& progress = {});

/// Teacher curve output for a batch, no tape.
DenseArray teacher_curve_output(const TeacherNet& teacher, const DenseArray& images, const DenseArray& maps);
/// Student tangent output for a batch, no tape, unclamped.
DenseArray student_tangent_output(const StudentNet& student, const DenseArray& images, const DenseArray& maps);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TeacherTraceRow>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<StudentTraceRow>& trace);

}  // namespace cudi
