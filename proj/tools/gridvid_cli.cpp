// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridvid/config.hpp"
#include "gridvid/corpus.hpp"
#include "gridvid/dataset.hpp"
#include "gridvid/errors.hpp"
#include "gridvid/gvf.hpp"
#include "gridvid/io.hpp"
#include "gridvid/metrics.hpp"
#include "gridvid/models.hpp"
#include "gridvid/pipeline.hpp"
#include "gridvid/schedule.hpp"
#include "gridvid/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace gridvid;

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n') ? ' ' : c;
  }
  return out + "\"";
}

RunConfig load_config(const std::string& path) {
  RunConfig c = path.empty() ? RunConfig{} : RunConfig::load(path);
  c.validate();
  return c;
}

// Output files may name directories that do not exist yet.
const std::string& with_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  return path;
}

fs::path checkpoint_path(const fs::path& dir, ModelRole role) {
  return dir / (to_string(role) + ".gvck");
}

std::map<ModelRole, std::unique_ptr<TrainedModel>> load_models(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::map<ModelRole, std::unique_ptr<TrainedModel>> out;
  for (ModelRole role : kAllRoles) {
    const fs::path p = checkpoint_path(dir, role);
    if (fs::exists(p)) out[role] = std::make_unique<TrainedModel>(TrainedModel::load(p, role));
  }
  if (out.empty()) throw MissingRoleError("no checkpoints found in " + dir.string());
  return out;
}

std::map<ModelRole, TrainedModel*> borrow(
    const std::map<ModelRole, std::unique_ptr<TrainedModel>>& models) {
  std::map<ModelRole, TrainedModel*> out;
  for (const auto& [role, m] : models) out[role] = m.get();
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("'" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ParseError("empty frame list");
  return out;
}

void write_text(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_file_atomic(out, text);
  }
}

// --- subcommands ----------------------------------------------------------

struct CorpusArgs {
  int scenes = 0;
  int frames = 56;
  std::uint64_t seed = 1;
  int frame_size = 16;
  std::string out;
};

int run_corpus(const CorpusArgs& a) {
  corpus::build_dataset(a.out, a.scenes, a.frames, a.seed, a.frame_size);
  std::cerr << "wrote " << a.scenes << " scenes to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string role;
  std::string data;
  std::string config;
  std::string out;
  int steps = -1;
  int limit = -1;
  int log_every = 100;
};

int run_train(const TrainArgs& a) {
  const ModelRole role = parse_role(a.role);
  const RunConfig config = load_config(a.config);
  const auto dataset = corpus::load_dataset(a.data, a.limit >= 0 ? std::optional<int>(a.limit)
                                                                 : std::nullopt);
  TrainedModel model(role, config);
  TrainOptions opt = TrainOptions::from_config(config);
  if (a.steps >= 0) opt.steps = a.steps;
  opt.on_step = [&](int step, double loss) {
    if (a.log_every > 0 && (step + 1) % a.log_every == 0) {
      std::cerr << "step " << step + 1 << " loss " << loss << "\n";
    }
  };
  std::mt19937_64 rng(config.seed * 7919 + static_cast<std::uint64_t>(role));
  const TrainReport r = train_role(model, dataset, opt, rng);
  model.save(with_parent(a.out));
  std::cerr << "trained " << model.id() << " in " << r.seconds << " s\n";
  return 0;
}

struct GenerateArgs {
  std::string prompt;
  int frames = 28;
  std::string ckpt_dir;
  std::uint64_t seed = 1;
  std::string out;
  std::string manifest;
};

int run_generate(const GenerateArgs& a) {
  corpus::parse_prompt(a.prompt);
  const auto models = load_models(a.ckpt_dir);
  pipeline::LearnedGenerator gen(borrow(models));
  const RunConfig& config = models.begin()->second->config();
  pipeline::GvfSink sink(with_parent(a.out), config.frame_size, 3, a.prompt);
  std::mt19937_64 rng(a.seed);
  const auto m =
      pipeline::generate_video(a.prompt, a.frames, gen, config.schedule_params(), sink, rng, a.seed);
  sink.close();
  if (!a.manifest.empty()) io::write_file_atomic(a.manifest, m.to_json() + "\n");
  std::cerr << "wrote " << m.n_frames << " frames to " << a.out << "\n";
  return 0;
}

struct InterpArgs {
  std::string keygrid;
  std::string prompt;
  std::string ckpt_dir;
  std::uint64_t seed = 1;
  std::string out;
  std::string manifest;
};

// The key grid file holds either one frame per cell or a single canvas.
GridImage read_key_grid(const std::string& path, const GridLayout& layout) {
  const corpus::Video v = read_gvf(path);
  const std::size_t cells = static_cast<std::size_t>(layout.cells());
  if (v.frames.size() == cells) return pack(v.frames, layout);
  if (v.frames.size() == 1 && v.frames[0].width() == layout.canvas_size() &&
      v.frames[0].height() == layout.canvas_size()) {
    GridImage g{layout, v.frames[0], {}};
    validate_grid(g);
    return g;
  }
  throw DimensionError(path + ": expected " + std::to_string(cells) +
                       " cell frames or one canvas of side " +
                       std::to_string(layout.canvas_size()));
}

int run_interp(const InterpArgs& a) {
  corpus::parse_prompt(a.prompt);
  const auto models = load_models(a.ckpt_dir);
  pipeline::LearnedGenerator gen(borrow(models));
  const RunConfig& config = models.begin()->second->config();
  const GridImage key = read_key_grid(a.keygrid, gen.layout());
  pipeline::GvfSink sink(with_parent(a.out), config.frame_size, 3, a.prompt);
  std::mt19937_64 rng(a.seed);
  const auto m = pipeline::interpolate_from_key_grid(key, a.prompt, gen, config.schedule_params(),
                                                     sink, rng, a.seed);
  sink.close();
  if (!a.manifest.empty()) io::write_file_atomic(a.manifest, m.to_json() + "\n");
  std::cerr << "wrote " << m.n_frames << " frames to " << a.out << "\n";
  return 0;
}

struct PlanArgs {
  int frames = 28;
  std::string config;
  int grid_side = 0;
  int key_stride = 0;
  std::string policy;
};

int run_plan(const PlanArgs& a) {
  RunConfig c = load_config(a.config);
  if (a.grid_side > 0) {
    c.grid_side = a.grid_side;
    c.grid_4x4 = false;
  }
  if (a.key_stride > 0) c.key_stride = a.key_stride;
  if (!a.policy.empty()) c.condition_policy = schedule::parse_condition_policy(a.policy);
  c.validate();
  std::cout << schedule::full_plan(a.frames, c.schedule_params()).manifest();
  return 0;
}

struct EvaluateArgs {
  std::string metric;
  std::string a;
  std::string b;
  std::string out;
  int block_len = 16;
};

int run_evaluate(const EvaluateArgs& e) {
  const auto va = corpus::load_video_dir(e.a);
  std::vector<corpus::Video> vb;
  if (!e.b.empty()) vb = corpus::load_video_dir(e.b);
  std::ostringstream csv;
  csv.precision(12);
  csv << "metric,value,n_a,n_b,extractor\n";
  if (e.metric == "clipsim") {
    // Videos from a scored against their own prompts, or index-paired
    // prompts from b when given.
    if (va.empty()) throw InsufficientSamplesError("clipsim needs at least one video");
    if (!vb.empty() && vb.size() != va.size()) {
      throw ArityError("clipsim pairs videos by index; sets differ in size");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
      const std::string& prompt = vb.empty() ? va[i].prompt : vb[i].prompt;
      acc += metrics::clipsim_proxy(va[i], prompt);
    }
    csv << "clipsim," << acc / va.size() << ',' << va.size() << ',' << vb.size()
        << ",signature/1\n";
  } else if (e.metric == "fvd" || e.metric == "bfvd") {
    if (e.b.empty()) throw ConfigError(e.metric + " needs --b");
    const auto& ex = metrics::default_video_extractor();
    const double v = e.metric == "fvd" ? metrics::fvd(va, vb, ex)
                                       : metrics::block_fvd(va, vb, e.block_len, ex);
    csv << (e.metric == "fvd" ? std::string("fvd") : "bfvd-" + std::to_string(e.block_len)) << ','
        << v << ',' << va.size() << ',' << vb.size() << ',' << ex.id() << "\n";
  } else if (e.metric == "is") {
    const metrics::GrammarClassifier cls;
    csv << "is," << metrics::inception_score(std::span<const corpus::Video>(va), cls) << ','
        << va.size() << ",0," << cls.id() << "\n";
    if (!vb.empty()) {
      csv << "is_b," << metrics::inception_score(std::span<const corpus::Video>(vb), cls) << ",0,"
          << vb.size() << ',' << cls.id() << "\n";
    }
  } else {
    throw ConfigError("unknown metric '" + e.metric + "'");
  }
  write_text(e.out, csv.str());
  return 0;
}

struct MemprobeArgs {
  std::string frames = "28,112,448";
  std::string out;
  std::string config;
  std::string prompt = "a red square moving right slowly on a black background";
  std::uint64_t seed = 1;
  bool oracle = false;
};

int run_memprobe(const MemprobeArgs& a) {
  const RunConfig config = load_config(a.config);
  const std::vector<int> lengths = parse_int_list(a.frames);
  const auto params = config.schedule_params();
  const corpus::PromptFields f = corpus::parse_prompt(a.prompt);
  pipeline::GeneratorFactory factory;
  std::vector<std::unique_ptr<TrainedModel>> toys;
  if (a.oracle) {
    corpus::SceneSpec s;
    s.shape = f.shape;
    s.color = f.color;
    s.direction = f.direction;
    s.background = f.background;
    s.frame_size = config.frame_size;
    s.shape_size = corpus::default_shape_size(config.frame_size);
    s.speed = 0.125;
    factory = [s, config, params] {
      return std::make_unique<pipeline::OracleGenerator>(s, config.layout(), params);
    };
  } else {
    // Untrained models: memory accounting does not depend on the weights.
    std::map<ModelRole, TrainedModel*> roles;
    for (ModelRole r : kAllRoles) {
      toys.push_back(std::make_unique<TrainedModel>(r, config));
      roles[r] = toys.back().get();
    }
    factory = [roles] { return std::make_unique<pipeline::LearnedGenerator>(roles); };
  }
  const auto reports = pipeline::memory_probe(lengths, factory, params, a.prompt, a.seed);
  write_text(a.out, pipeline::memory_csv(reports));
  return 0;
}

struct PlotArgs {
  std::string in;
  std::string out;
};

int run_plot(const PlotArgs& a) {
  write_text(a.out, plot::plot_csv(io::read_file(a.in)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-image diffusion video toolkit"};
  app.require_subcommand(1);

  CorpusArgs corpus_args;
  auto* corpus_cmd = app.add_subcommand("corpus", "synthetic corpus tools");
  corpus_cmd->require_subcommand(1);
  auto* build = corpus_cmd->add_subcommand("build", "render a synthetic dataset");
  build->add_option("--scenes", corpus_args.scenes)->required();
  build->add_option("--frames", corpus_args.frames)->required();
  build->add_option("--seed", corpus_args.seed)->required();
  build->add_option("--out", corpus_args.out)->required();
  build->add_option("--frame-size", corpus_args.frame_size);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train one model role");
  train->add_option("--role", train_args.role)->required();
  train->add_option("--data", train_args.data)->required();
  train->add_option("--config", train_args.config)->required();
  train->add_option("--out", train_args.out)->required();
  train->add_option("--steps", train_args.steps, "override train_steps");
  train->add_option("--limit", train_args.limit, "use only the first N scenes");
  train->add_option("--log-every", train_args.log_every);

  GenerateArgs gen_args;
  auto* generate = app.add_subcommand("generate", "generate a video from a prompt");
  generate->add_option("--prompt", gen_args.prompt)->required();
  generate->add_option("--frames", gen_args.frames)->required();
  generate->add_option("--ckpt-dir", gen_args.ckpt_dir)->required();
  generate->add_option("--seed", gen_args.seed)->required();
  generate->add_option("--out", gen_args.out)->required();
  generate->add_option("--manifest", gen_args.manifest);

  InterpArgs interp_args;
  auto* interp = app.add_subcommand("interp-only", "fill one segment from a given key grid");
  interp->add_option("--keygrid", interp_args.keygrid)->required();
  interp->add_option("--prompt", interp_args.prompt)->required();
  interp->add_option("--ckpt-dir", interp_args.ckpt_dir)->required();
  interp->add_option("--out", interp_args.out)->required();
  interp->add_option("--seed", interp_args.seed);
  interp->add_option("--manifest", interp_args.manifest);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "print the generation plan manifest");
  plan->add_option("--frames", plan_args.frames)->required();
  plan->add_option("--config", plan_args.config);
  plan->add_option("--grid-side", plan_args.grid_side);
  plan->add_option("--key-stride", plan_args.key_stride);
  plan->add_option("--policy", plan_args.policy);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "compute a metric over video directories");
  evaluate->add_option("--metric", eval_args.metric)
      ->required()
      ->check(CLI::IsMember({"clipsim", "fvd", "bfvd", "is"}));
  evaluate->add_option("--a", eval_args.a)->required();
  evaluate->add_option("--b", eval_args.b);
  evaluate->add_option("--out", eval_args.out)->required();
  evaluate->add_option("--block-len", eval_args.block_len);

  MemprobeArgs mem_args;
  auto* memprobe = app.add_subcommand("memprobe", "peak resident memory against video length");
  memprobe->add_option("--frames", mem_args.frames);
  memprobe->add_option("--out", mem_args.out)->required();
  memprobe->add_option("--config", mem_args.config);
  memprobe->add_option("--prompt", mem_args.prompt);
  memprobe->add_option("--seed", mem_args.seed);
  memprobe->add_flag("--oracle", mem_args.oracle, "use the renderer instead of toy models");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plot", "render a CSV as SVG");
  plot_cmd->add_option("--in", plot_args.in)->required();
  plot_cmd->add_option("--out", plot_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << "error kind=usage code=2 message=" << quoted(e.what()) << "\n";
    return code == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return run_corpus(corpus_args);
    if (train->parsed()) return run_train(train_args);
    if (generate->parsed()) return run_generate(gen_args);
    if (interp->parsed()) return run_interp(interp_args);
    if (plan->parsed()) return run_plan(plan_args);
    if (evaluate->parsed()) return run_evaluate(eval_args);
    if (memprobe->parsed()) return run_memprobe(mem_args);
    if (plot_cmd->parsed()) return run_plot(plot_args);
  } catch (const Error& e) {
    std::cerr << "error kind=" << error_kind_name(e.kind()) << " code=" << e.exit_code()
              << " message=" << quoted(e.what()) << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal code=1 message=" << quoted(e.what()) << "\n";
    return 1;
  }
  return 2;
}
