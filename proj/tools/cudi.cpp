// cudi: train, distill, adjust, benchmark and serve exposure-curve models.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cudi/bench.hpp"
#include "cudi/checkpoint.hpp"
#include "cudi/corpus.hpp"
#include "cudi/heatmap.hpp"
#include "cudi/image_io.hpp"
#include "cudi/pipeline.hpp"
#include "cudi/service.hpp"
#include "cudi/training.hpp"

namespace fs = std::filesystem;
using namespace cudi;

namespace {

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const unsigned long v = std::stoul(item, &pos);
    if (pos != item.size() || v == 0) throw CLI::ValidationError("--sizes", "bad size '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--sizes", "no sizes given");
  return out;
}

ProgressFn progress_printer(std::size_t steps, bool quiet) {
  if (quiet) return {};
  const std::size_t every = std::max<std::size_t>(1, steps / 20);
  return [every, steps](std::size_t step, double loss) {
    if ((step + 1) % every == 0 || step + 1 == steps) {
      std::fprintf(stderr, "step %zu/%zu loss %.6f\n", step + 1, steps, loss);
    }
  };
}

fs::path default_trace(const fs::path& out) { return fs::path(out.string() + ".trace.csv"); }

AdjustService* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exposure adjustment with distilled tangent-line curves"};
  app.require_subcommand(1);

  // train-teacher
  auto* teach = app.add_subcommand("train-teacher", "zero-reference training of the curve teacher");
  TrainConfig tcfg = TrainConfig::desk_scale();
  fs::path t_out, t_trace;
  bool quiet = false;
  teach->add_option("--data", tcfg.corpus_dir, "directory of PNG images")->required();
  teach->add_option("--out", t_out, "output checkpoint")->required();
  teach->add_option("--steps", tcfg.steps, "optimizer steps")->required();
  teach->add_option("--width", tcfg.teacher.width, "width multiplier in (0,1]")->capture_default_str();
  teach->add_option("--patch", tcfg.patch, "training crop size")->capture_default_str();
  teach->add_option("--batch", tcfg.batch, "batch size")->capture_default_str();
  teach->add_option("--seed", tcfg.seed, "run seed")->capture_default_str();
  teach->add_option("--trace", t_trace, "loss trace CSV (default OUT.trace.csv)");
  teach->add_flag("--quiet", quiet, "no progress output");

  // distill
  auto* dist = app.add_subcommand("distill", "train the student against a frozen teacher");
  TrainConfig scfg = TrainConfig::desk_scale();
  fs::path s_teacher, s_out, s_trace;
  dist->add_option("--teacher", s_teacher, "teacher checkpoint")->required();
  dist->add_option("--data", scfg.corpus_dir, "directory of PNG images")->required();
  dist->add_option("--out", s_out, "output checkpoint")->required();
  dist->add_option("--steps", scfg.steps, "optimizer steps")->required();
  dist->add_option("--patch", scfg.patch, "training crop size")->capture_default_str();
  dist->add_option("--batch", scfg.batch, "batch size")->capture_default_str();
  dist->add_option("--seed", scfg.seed, "run seed")->capture_default_str();
  dist->add_option("--trace", s_trace, "loss trace CSV (default OUT.trace.csv)");
  dist->add_flag("--quiet", quiet, "no progress output");

  // adjust
  auto* adj = app.add_subcommand("adjust", "adjust the exposure of one PNG");
  fs::path a_model, a_in, a_out, a_map, a_dump;
  std::string a_engine = "student", a_exposure, a_auto;
  adj->add_option("--model", a_model, "checkpoint")->required();
  adj->add_option("--engine", a_engine, "teacher|student")->check(CLI::IsMember({"teacher", "student"}));
  adj->add_option("--input", a_in, "input PNG")->required();
  adj->add_option("--output", a_out, "output PNG")->required();
  auto* o_exp = adj->add_option("--exposure", a_exposure, "uniform value in [0,1], or under|over");
  auto* o_auto = adj->add_option("--auto", a_auto, "spatially variant map: under|over")
                     ->check(CLI::IsMember({"under", "over"}));
  auto* o_map = adj->add_option("--map", a_map, "painted grayscale exposure map PNG");
  o_exp->excludes(o_auto)->excludes(o_map);
  o_auto->excludes(o_map);
  adj->add_option("--dump-maps", a_dump, "write parameter-map heatmaps to this directory");

  // bench
  auto* bench = app.add_subcommand("bench", "time the iterative curve against the linear map");
  std::string b_sizes = "512,1024,2048";
  std::size_t b_threads = 1, b_reps = 9;
  fs::path b_csv;
  bench->add_option("--sizes", b_sizes, "comma-separated square sizes")->capture_default_str();
  bench->add_option("--threads", b_threads, "worker threads")->capture_default_str();
  bench->add_option("--reps", b_reps, "timed repetitions")->capture_default_str();
  bench->add_option("--csv", b_csv, "CSV output (default stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP service for the studio front end");
  fs::path v_model;
  int v_port = 8080;
  std::string v_host = "127.0.0.1";
  serve->add_option("--model", v_model, "checkpoint")->required();
  serve->add_option("--port", v_port, "TCP port")->capture_default_str();
  serve->add_option("--host", v_host, "bind address")->capture_default_str();

  // synth-corpus
  auto* synth = app.add_subcommand("synth-corpus", "write procedural training images");
  fs::path c_out;
  std::size_t c_count = 50, c_size = 96;
  std::uint64_t c_seed = 1;
  double c_spread = 0.0;
  synth->add_option("--out", c_out, "output directory")->required();
  synth->add_option("--count", c_count, "number of images")->capture_default_str();
  synth->add_option("--size", c_size, "edge length in pixels")->capture_default_str();
  synth->add_option("--seed", c_seed, "generator seed")->capture_default_str();
  synth->add_option("--exposure-spread", c_spread, "re-expose each image with gamma 2^U[-s, s]")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (teach->parsed()) {
      const Corpus corpus = load_corpus(tcfg.corpus_dir, tcfg.patch);
      const TeacherRun run = train_teacher(corpus, tcfg, progress_printer(tcfg.steps, quiet));
      save_checkpoint(t_out, run.net);
      write_trace_csv(t_trace.empty() ? default_trace(t_out) : t_trace, run.trace);
    } else if (dist->parsed()) {
      const TeacherNet teacher = load_teacher(s_teacher);
      scfg.teacher = teacher.config();
      const Corpus corpus = load_corpus(scfg.corpus_dir, scfg.patch);
      const StudentRun run = distill_student(teacher, corpus, scfg, progress_printer(scfg.steps, quiet));
      save_checkpoint(s_out, run.net);
      write_trace_csv(s_trace.empty() ? default_trace(s_out) : s_trace, run.trace);
    } else if (adj->parsed()) {
      const Model model = load_model(a_model);
      AdjustRequest req;
      req.image = read_png(a_in);
      req.engine = parse_engine(a_engine);
      req.keep_maps = !a_dump.empty();
      if (!a_map.empty()) {
        req.exposure = PaintedExposure{read_map_png(a_map)};
      } else if (!a_auto.empty()) {
        req.exposure = AutoExposure{parse_preset(a_auto)};
      } else if (!a_exposure.empty()) {
        if (a_exposure == "under" || a_exposure == "over") {
          req.exposure = UniformExposure{preset_value(parse_preset(a_exposure))};
        } else {
          std::size_t pos = 0;
          const float v = std::stof(a_exposure, &pos);
          if (pos != a_exposure.size()) throw ContractViolation("--exposure '" + a_exposure + "' is not a number");
          req.exposure = UniformExposure{v};
        }
      } else {
        throw ContractViolation("one of --exposure, --auto or --map is required");
      }
      const AdjustResult res = adjust(req, model);
      write_png(a_out, res.image);
      if (!a_dump.empty()) {
        fs::create_directories(a_dump);
        write_file(a_dump / "exposure_map.png", encode_map_png(res.exposure_map));
        if (res.curve_params) write_heatmap(a_dump / "curve_A.png", curve_heatmap(*res.curve_params));
        if (res.tangent_maps) {
          write_heatmap(a_dump / "slope_K.png", slope_heatmap(*res.tangent_maps));
          write_heatmap(a_dump / "intercept_B.png", intercept_heatmap(*res.tangent_maps));
        }
      }
      std::fprintf(stderr, "mean brightness %.4f", res.stats.mean_brightness);
      if (res.stats.region_mean_error) std::fprintf(stderr, ", region error %.4f", *res.stats.region_mean_error);
      std::fprintf(stderr, ", %.1f ms\n", res.stats.elapsed_ms);
    } else if (bench->parsed()) {
      std::vector<BenchResult> rows;
      for (std::size_t s : parse_sizes(b_sizes)) {
        for (KernelKind k : {KernelKind::iterative, KernelKind::linear}) rows.push_back(time_op(k, s, s, b_reps, b_threads));
      }
      if (b_csv.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(b_csv);
        if (!out) throw std::runtime_error("cannot write " + b_csv.string());
        write_bench_csv(out, rows);
      }
    } else if (serve->parsed()) {
      AdjustService service(load_model(v_model));
      const int port = service.bind(v_host, v_port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening on http://%s:%d\n", v_host.c_str(), port);
      service.run();
      g_service = nullptr;
    } else if (synth->parsed()) {
      write_corpus(synthetic_corpus(c_count, c_size, c_size, c_seed, c_spread), c_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
