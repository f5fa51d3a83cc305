// Copyright 2026 The Taskforge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "taskforge/cli.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "taskforge/awd_solver.h"
#include "taskforge/error.h"
#include "taskforge/filter.h"
#include "taskforge/kernels.h"
#include "taskforge/merge.h"
#include "taskforge/quadratic.h"
#include "taskforge/report.h"
#include "taskforge/safetensors.h"
#include "taskforge/score.h"
#include "taskforge/task_vector.h"

namespace taskforge {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every flag value; defaults here are the built-in layer of the
// flag > config file > default precedence.
struct Options {
  std::string base;
  std::vector<std::string> finetuned;
  std::vector<std::string> task_vectors;
  std::string out;
  std::vector<std::string> filter = {"*.weight"};
  std::string filter_mode = "keep";
  bool skip_non_float = false;
  bool allow_nonfinite = false;

  double lambda = 0.3;
  std::string schedule;
  double alpha = 1e-4;
  double beta = 1e-4;
  int64_t steps = 1000;
  int64_t log_every = 10;
  uint64_t seed = 0;
  std::string method = "task-arithmetic";
  double trim_k = 0.2;
  bool per_tensor_trim = false;
  double drop_rate = 0.5;

  std::string format = "json";
  bool per_tensor = false;
  bool write_disentangled = false;

  std::string toy_config;
  int64_t grid = 21;
  std::vector<int64_t> tasks = {0, 1};
  std::vector<double> range = {0.0, 1.5};
  bool disentangle = false;
  std::vector<double> lambdas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double k_i = -1.0;

  std::vector<double> merged_scores;
  std::vector<double> reference_scores;
  std::vector<std::string> labels;

  std::string config;
};

struct Binding {
  std::string key;
  CLI::Option* option;
  std::function<void(const json&)> set;
  std::function<json()> get;
};

struct Command {
  CLI::App* app = nullptr;
  std::string name;
  std::vector<Binding> bindings;
};

template <typename T>
void Bind(Command& cmd, const std::string& key, T& var, const std::string& help) {
  CLI::Option* opt = cmd.app->add_option("--" + key, var, help);
  if constexpr (!std::is_same_v<T, std::string> && !std::is_arithmetic_v<T>) opt->expected(1, -1);
  cmd.bindings.push_back({key, opt, [&var](const json& j) { var = j.get<T>(); },
                          [&var]() { return json(var); }});
}

void BindFlag(Command& cmd, const std::string& key, bool& var, const std::string& help) {
  CLI::Option* opt = cmd.app->add_flag("--" + key, var, help);
  cmd.bindings.push_back({key, opt, [&var](const json& j) { var = j.get<bool>(); },
                          [&var]() { return json(var); }});
}

void BindInputs(Command& c, Options& o) {
  Bind(c, "base", o.base, "Pre-trained checkpoint (safetensors)");
  Bind(c, "finetuned", o.finetuned, "Fine-tuned checkpoints");
  Bind(c, "task-vectors", o.task_vectors, "Stored task-vector checkpoints");
  Bind(c, "filter", o.filter, "Glob patterns selecting tensors (default '*.weight'; '*' for all)");
  Bind(c, "filter-mode", o.filter_mode, "keep | drop matching tensors");
  BindFlag(c, "skip-non-float", o.skip_non_float, "Ignore integer/bool tensors");
  BindFlag(c, "allow-nonfinite", o.allow_nonfinite, "Accept NaN/Inf weights");
}

void BindSolver(Command& c, Options& o) {
  Bind(c, "alpha", o.alpha, "Weight of the redundant-vector norm term");
  Bind(c, "beta", o.beta, "Gradient-descent learning rate");
  Bind(c, "steps", o.steps, "Solver steps");
  Bind(c, "log-every", o.log_every, "Trace sampling interval");
}

SolverConfig SolverFrom(const Options& o) {
  SolverConfig cfg;
  cfg.steps = o.steps;
  cfg.learning_rate = o.beta;
  cfg.alpha = o.alpha;
  cfg.log_every = o.log_every;
  cfg.seed = o.seed;
  return cfg;
}

// Applies config-file values for every option not given on the command line.
void ResolveConfig(Command& cmd, const std::string& path) {
  if (path.empty()) return;
  json j = ReadJsonFile(path);
  if (j.contains("command") && j.contains("config")) j = j["config"];  // a RunManifest
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config file must hold a JSON object", path);
  for (auto& b : cmd.bindings) {
    if (b.option->count() == 0 && j.contains(b.key)) {
      try {
        b.set(j[b.key]);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidConfig, "config key '" + b.key + "': " + e.what(), b.key);
      }
    }
  }
}

json ResolvedConfig(const Command& cmd) {
  json j = json::object();
  for (const auto& b : cmd.bindings) j[b.key] = b.get();
  return j;
}

LoadOptions LoadOpts(const Options& o) { return {o.skip_non_float, o.allow_nonfinite}; }

std::optional<FilterSpec> FilterFrom(const Options& o) {
  if (o.filter.empty()) return std::nullopt;
  FilterSpec f;
  f.patterns = o.filter;
  if (o.filter_mode == "keep") {
    f.mode = FilterMode::kKeepMatching;
  } else if (o.filter_mode == "drop") {
    f.mode = FilterMode::kDropMatching;
  } else {
    throw UsageError("--filter-mode must be keep or drop");
  }
  f.Validate();
  return f;
}

std::string Stem(const std::string& path) { return fs::path(path).stem().string(); }

uint64_t HashFile(const std::string& path) {
  const std::string text = ReadTextFile(path);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Run {
 public:
  Run(const Command& cmd, std::ostream& out)
      : cmd_(cmd), out_(out), start_(std::chrono::steady_clock::now()) {
    manifest_.command = cmd.name;
    manifest_.config = ResolvedConfig(cmd);
  }

  ParameterSet Load(const std::string& path, const Options& o) {
    ParameterSet ps = LoadCheckpoint(path, LoadOpts(o));
    std::error_code ec;
    manifest_.inputs.push_back({path, FingerprintHex(ps.fingerprint()), fs::file_size(path, ec)});
    return ps;
  }

  void NoteInput(const std::string& path) {
    std::error_code ec;
    manifest_.inputs.push_back({path, FingerprintHex(HashFile(path)), fs::file_size(path, ec)});
  }

  void Wrote(const fs::path& path) { manifest_.outputs.push_back(path.string()); }

  void WriteText(const fs::path& path, const std::string& text) {
    WriteTextFile(path, text);
    Wrote(path);
  }

  void Finish(const fs::path& manifest_path) {
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    WriteTextFile(manifest_path, manifest_.ToJson().dump(2) + "\n");
    out_ << "wrote " << manifest_path.string() << "\n";
  }

 private:
  const Command& cmd_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
};

fs::path SiblingPath(const std::string& out, const std::string& suffix) {
  return fs::path(out + suffix);
}

void RequireOut(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
}

struct LoadedFamily {
  std::optional<ParameterSet> base;  // filtered
  std::optional<ParameterSet> base_full;
  std::vector<TaskVector> family;
};

LoadedFamily LoadFamily(Run& run, const Options& o, bool need_base) {
  const auto filter = FilterFrom(o);
  LoadedFamily lf;
  if (!o.base.empty()) {
    lf.base_full = run.Load(o.base, o);
    lf.base = filter ? FilterParameters(*lf.base_full, *filter) : *lf.base_full;
  } else if (need_base) {
    throw UsageError("--base is required");
  }
  if (!o.task_vectors.empty()) {
    for (const auto& path : o.task_vectors) {
      ParameterSet ps = run.Load(path, o);
      if (filter) ps = FilterParameters(ps, *filter);
      lf.family.push_back(FromCheckpoint(std::move(ps), Stem(path)));
    }
  } else if (!o.finetuned.empty()) {
    if (!lf.base) throw UsageError("--finetuned needs --base to form task vectors");
    for (const auto& path : o.finetuned) {
      ParameterSet ft = run.Load(path, o);
      if (filter) ft = FilterParameters(ft, *filter);
      lf.family.push_back(Extract(ft, *lf.base, Stem(path)));
    }
  } else {
    throw UsageError("give --task-vectors or --base with --finetuned");
  }
  if (lf.base) ValidateAligned(*lf.base, lf.family.front().delta);
  return lf;
}

// Replaces the filtered tensors of `full` with those of `subset`.
ParameterSet Overlay(const ParameterSet& full, const ParameterSet& subset) {
  if (full.layout().SameStructure(subset.layout())) return subset;
  ParameterSet out = full;
  for (const auto& info : subset.layout().tensors()) {
    auto src = subset.tensor(info.name);
    auto dst = out.tensor(info.name);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

int RunExtract(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  if (o.base.empty() || o.finetuned.empty()) throw UsageError("extract needs --base and --finetuned");
  o.task_vectors.clear();
  Run run(cmd, out);
  LoadedFamily lf = LoadFamily(run, o, true);
  fs::create_directories(o.out);
  for (const auto& tv : lf.family) {
    const fs::path path = fs::path(o.out) / (tv.task_label + ".safetensors");
    SaveCheckpoint(ToCheckpoint(tv), path);
    run.Wrote(path);
  }
  run.Finish(fs::path(o.out) / "manifest.json");
  return kExitOk;
}

int RunSimilarity(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  if (o.format != "json" && o.format != "csv") throw UsageError("--format must be json or csv");
  Run run(cmd, out);
  LoadedFamily lf = LoadFamily(run, o, false);
  const SimilarityMatrix m = ComputeSimilarityMatrix(lf.family);
  run.WriteText(o.out, o.format == "json" ? m.ToJson() : m.ToCsv());
  if (o.per_tensor) {
    std::ostringstream os;
    os << "tensor,task_a,task_b,cosine\n";
    for (const auto& c : PerTensorCosines(lf.family)) {
      os << CsvField(c.tensor) << ',' << CsvField(lf.family[c.task_a].task_label) << ','
         << CsvField(lf.family[c.task_b].task_label) << ',' << FormatDouble(c.cosine) << '\n';
    }
    run.WriteText(SiblingPath(o.out, ".per_tensor.csv"), os.str());
  }
  run.Finish(SiblingPath(o.out, ".manifest.json"));
  return kExitOk;
}

int RunSolve(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  Run run(cmd, out);
  LoadedFamily lf = LoadFamily(run, o, false);
  const SolverConfig cfg = SolverFrom(o);
  const SolveResult result = Solve(lf.family, cfg);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  SaveCheckpoint(result.delta.ToParameterSet(), dir / "delta.safetensors");
  run.Wrote(dir / "delta.safetensors");
  run.WriteText(dir / "delta.json", result.Sidecar(lf.family, cfg).dump(2) + "\n");
  run.WriteText(dir / "trace.csv", result.trace.ToCsv());
  if (o.write_disentangled) {
    fs::create_directories(dir / "disentangled");
    for (const auto& tv : Disentangle(lf.family, result.delta)) {
      const fs::path path = dir / "disentangled" / (tv.task_label + ".safetensors");
      SaveCheckpoint(ToCheckpoint(tv), path);
      run.Wrote(path);
    }
  }
  run.Finish(dir / "manifest.json");
  out << "L_O " << FormatDouble(result.final_loss.orthogonality) << "  L_R "
      << FormatDouble(result.final_loss.invariance) << "\n";
  if (result.diverged) throw Error(ErrorCode::kNumericalDivergence, result.message);
  return kExitOk;
}

CoefficientSchedule ScheduleFrom(const Options& o, Run& run) {
  if (o.schedule.empty()) return GlobalCoefficient{o.lambda};
  run.NoteInput(o.schedule);
  const json j = ReadJsonFile(o.schedule);
  try {
    if (j.contains("matrix")) {
      return PerTaskPerLayerCoefficients{j.at("matrix").get<std::vector<std::vector<double>>>(),
                                         j.at("layer_names").get<std::vector<std::string>>()};
    }
    return PerTaskCoefficients{j.at("lambdas").get<std::vector<double>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, "schedule file: " + std::string(e.what()), o.schedule);
  }
}

int RunMergeCommand(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  Run run(cmd, out);
  MergeConfig mc;
  try {
    mc.method = ParseMethod(o.method);
  } catch (const Error&) {
    throw UsageError("unknown --method '" + o.method + "'");
  }
  mc.schedule = ScheduleFrom(o, run);
  mc.ties_trim_fraction = o.trim_k;
  mc.ties_per_tensor = o.per_tensor_trim;
  mc.dare_drop_rate = o.drop_rate;
  mc.rng_seed = o.seed;
  if (mc.method == MergeMethod::kAwdTaskArithmetic) mc.awd = SolverFrom(o);

  json report;
  report["method"] = MethodName(mc.method);
  report["config"] = mc.ToJson();
  if (mc.method == MergeMethod::kTies || mc.method == MergeMethod::kDareTaskArithmetic) {
    report["note"] = "trim/drop defaults are conventions, not tuned values";
  }

  ParameterSet merged;
  if (mc.method == MergeMethod::kAverage) {
    if (o.finetuned.empty()) throw UsageError("average needs --finetuned models");
    std::vector<ParameterSet> models;
    for (const auto& p : o.finetuned) models.push_back(run.Load(p, o));
    merged = RunMerge(mc, nullptr, {}, models).merged;
    report["input_fingerprints"] = json::array();
    for (const auto& m : models) report["input_fingerprints"].push_back(FingerprintHex(m.fingerprint()));
  } else {
    LoadedFamily lf = LoadFamily(run, o, true);
    MergeOutcome outcome = RunMerge(mc, &*lf.base, lf.family, {});
    merged = Overlay(*lf.base_full, outcome.merged);
    report["base_fingerprint"] = FingerprintHex(lf.base_full->fingerprint());
    report["task_labels"] = json::array();
    for (const auto& tv : lf.family) report["task_labels"].push_back(tv.task_label);
    if (outcome.awd) {
      report["final_losses"] = {{"L", outcome.awd->final_loss.total},
                                {"L_O", outcome.awd->final_loss.orthogonality},
                                {"L_R", outcome.awd->final_loss.invariance}};
      report["initial_mean_abs_cos"] = outcome.awd->trace.records.front().mean_abs_cos;
      run.WriteText(SiblingPath(o.out, ".trace.csv"), outcome.awd->trace.ToCsv());
    }
  }
  SaveCheckpoint(merged, o.out);
  run.Wrote(o.out);
  run.WriteText(SiblingPath(o.out, ".report.json"), report.dump(2) + "\n");
  run.Finish(SiblingPath(o.out, ".manifest.json"));
  return kExitOk;
}

theory::ToyExperiment LoadToy(Run& run, const Options& o) {
  if (o.toy_config.empty()) throw UsageError("--toy-config is required");
  run.NoteInput(o.toy_config);
  return theory::LoadExperiment(o.toy_config);
}

int RunToyGap(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  if (o.format != "json" && o.format != "csv") throw UsageError("--format must be json or csv");
  Run run(cmd, out);
  const auto exp = LoadToy(run, o);
  json rows = json::array();
  std::ostringstream csv;
  csv << "task,exact,first_order,proxy\n";
  for (size_t i = 0; i < exp.size(); ++i) {
    const double exact = theory::MergingGapExact(exp, i);
    const double first = theory::MergingGapFirstOrder(exp, i);
    const double proxy = theory::MergingGapProxy(exp, i, o.k_i);
    rows.push_back({{"task", exp.tasks[i].label}, {"exact", exact}, {"first_order", first}, {"proxy", proxy}});
    csv << CsvField(exp.tasks[i].label) << ',' << FormatDouble(exact) << ',' << FormatDouble(first) << ','
        << FormatDouble(proxy) << '\n';
  }
  run.WriteText(o.out, o.format == "csv" ? csv.str() : json{{"k_i", o.k_i}, {"gaps", rows}}.dump(2) + "\n");
  run.Finish(SiblingPath(o.out, ".manifest.json"));
  return kExitOk;
}

int RunToyLandscape(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  if (o.tasks.size() != 2) throw UsageError("--tasks takes two indices");
  if (o.range.size() != 2) throw UsageError("--range takes two values");
  if (o.grid < 2) throw UsageError("--grid must be >= 2");
  Run run(cmd, out);
  const auto exp = LoadToy(run, o);
  theory::Vector delta;
  if (o.disentangle) {
    SolveResult solved;
    const auto dis = theory::DisentangleToy(exp, SolverFrom(o), &solved);
    delta = Eigen::Map<const theory::Vector>(solved.delta.values.data(),
                                             static_cast<Eigen::Index>(solved.delta.values.size()));
  }
  const auto grid = theory::LandscapeGrid(exp, static_cast<size_t>(o.tasks[0]), static_cast<size_t>(o.tasks[1]),
                                          o.range[0], o.range[1], static_cast<size_t>(o.grid), delta);
  std::ostringstream csv;
  csv << "lambda_i,lambda_j,loss\n";
  for (const auto& p : grid) {
    csv << FormatDouble(p.lambda_i) << ',' << FormatDouble(p.lambda_j) << ',' << FormatDouble(p.loss) << '\n';
  }
  run.WriteText(o.out, csv.str());
  run.Finish(SiblingPath(o.out, ".manifest.json"));
  return kExitOk;
}

int RunToySweep(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  Run run(cmd, out);
  const auto exp = LoadToy(run, o);
  const auto ta = theory::CoefficientSweep(exp, o.lambdas, theory::SweepMethod::kTaskArithmetic);
  const auto awd = theory::CoefficientSweep(exp, o.lambdas, theory::SweepMethod::kAwdTaskArithmetic, SolverFrom(o));
  std::ostringstream csv;
  csv << "lambda,task_arithmetic,awd_task_arithmetic\n";
  for (size_t k = 0; k < ta.size(); ++k) {
    csv << FormatDouble(ta[k].lambda) << ',' << FormatDouble(ta[k].summed_loss) << ','
        << FormatDouble(awd[k].summed_loss) << '\n';
  }
  run.WriteText(o.out, csv.str());
  run.Finish(SiblingPath(o.out, ".manifest.json"));
  return kExitOk;
}

int RunScore(Command& cmd, Options& o, std::ostream& out) {
  RequireOut(o);
  Run run(cmd, out);
  const ScoreReport r = NormalizedScore(o.merged_scores, o.reference_scores, o.labels);
  run.WriteText(o.out, r.ToJson().dump(2) + "\n");
  run.Finish(SiblingPath(o.out, ".manifest.json"));
  out << "normalized score " << FormatDouble(r.mean) << "\n";
  return kExitOk;
}

void ApplyThreadCap() {
  if (const char* env = std::getenv("TASKFORGE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) kernels::SetMaxThreads(std::min(n, kernels::MaxThreads()));
  }
}

}  // namespace

int CliDispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ApplyThreadCap();
  Options o;
  CLI::App app{"taskforge: task-vector merging with adaptive weight disentanglement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& help,
                 const std::string& full_name) -> Command& {
    auto c = std::make_unique<Command>();
    c->app = parent->add_subcommand(name, help);
    c->name = full_name;
    Bind(*c, "out", o.out, "Output path");
    Bind(*c, "config", o.config, "JSON config or run manifest; flags take precedence");
    commands.push_back(std::move(c));
    return *commands.back();
  };

  Command& extract = add(&app, "extract", "Write task vectors (fine-tuned minus base)", "extract");
  BindInputs(extract, o);

  Command& similarity = add(&app, "similarity", "Pairwise cosine similarity of task vectors", "similarity");
  BindInputs(similarity, o);
  Bind(similarity, "format", o.format, "json | csv");
  BindFlag(similarity, "per-tensor", o.per_tensor, "Also write per-tensor cosines");

  Command& solve = add(&app, "solve", "Solve the redundant vector", "solve");
  BindInputs(solve, o);
  BindSolver(solve, o);
  Bind(solve, "seed", o.seed, "Recorded for provenance");
  BindFlag(solve, "write-disentangled", o.write_disentangled, "Save tau_i - delta per task");

  Command& merge = add(&app, "merge", "Merge models", "merge");
  BindInputs(merge, o);
  BindSolver(merge, o);
  Bind(merge, "method", o.method, "average | task-arithmetic | ties | dare-ta | awd-ta");
  Bind(merge, "lambda", o.lambda, "Global merging coefficient");
  Bind(merge, "schedule", o.schedule, "JSON with per-task 'lambdas' or layer-wise 'matrix'+'layer_names'");
  Bind(merge, "trim-k", o.trim_k, "Ties: fraction of entries kept");
  BindFlag(merge, "per-tensor-trim", o.per_tensor_trim, "Ties: trim within each tensor");
  Bind(merge, "drop-rate", o.drop_rate, "DARE drop probability");
  Bind(merge, "seed", o.seed, "DARE seed");

  CLI::App* toy = app.add_subcommand("toy", "Quadratic-task theory oracle");
  toy->require_subcommand(1);
  Command& gap = add(toy, "gap", "Merging gaps per task", "toy gap");
  Bind(gap, "toy-config", o.toy_config, "Toy experiment JSON");
  Bind(gap, "format", o.format, "json | csv");
  Bind(gap, "k-i", o.k_i, "Negative gradient-proxy constant");
  Command& landscape = add(toy, "landscape", "Loss landscape over two task vectors", "toy landscape");
  Bind(landscape, "toy-config", o.toy_config, "Toy experiment JSON");
  Bind(landscape, "grid", o.grid, "Grid resolution per axis");
  Bind(landscape, "tasks", o.tasks, "Task indices i j");
  Bind(landscape, "range", o.range, "Coefficient range lo hi");
  BindFlag(landscape, "disentangle", o.disentangle, "Use tau - delta instead of tau");
  BindSolver(landscape, o);
  Command& sweep = add(toy, "sweep", "Summed loss versus merging coefficient", "toy sweep");
  Bind(sweep, "toy-config", o.toy_config, "Toy experiment JSON");
  Bind(sweep, "lambdas", o.lambdas, "Coefficients to evaluate");
  BindSolver(sweep, o);

  Command& score = add(&app, "score", "Normalized score of a merged model", "score");
  Bind(score, "merged", o.merged_scores, "Per-task scores of the merged model");
  Bind(score, "reference", o.reference_scores, "Per-task scores of the fine-tuned models");
  Bind(score, "labels", o.labels, "Task labels");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  using Handler = int (*)(Command&, Options&, std::ostream&);
  const std::pair<Command*, Handler> table[] = {
      {&extract, RunExtract}, {&similarity, RunSimilarity}, {&solve, RunSolve},
      {&merge, RunMergeCommand}, {&gap, RunToyGap},         {&landscape, RunToyLandscape},
      {&sweep, RunToySweep},   {&score, RunScore},
  };
  for (const auto& [cmd, handler] : table) {
    if (!cmd->app->parsed()) continue;
    try {
      ResolveConfig(*cmd, o.config);
      return handler(*cmd, o, out);
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << "\n" << cmd->app->help();
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitData;
    }
  }
  err << app.help();
  return kExitUsage;
}

int CliDispatch(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return CliDispatch(args, std::cout, std::cerr);
}

}  // namespace taskforge
