// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "gridvid/checkpoint.hpp"
#include "gridvid/config.hpp"
#include "gridvid/errors.hpp"
#include "gridvid/gvf.hpp"
#include "gridvid/io.hpp"
#include "gridvid/svg_plot.hpp"
#include "support.hpp"

using namespace gridvid;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + GRIDVID_CLI + "\" " + args + " > \"" + out.string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(out);
  r.err = io::read_file(err);
  return r;
}

corpus::Video sample_video() {
  const auto s = testing::scene(corpus::Shape::kCircle, corpus::Color::kYellow,
                                corpus::Direction::kUpRight, 0.5, 2, 9);
  return testing::video_of(s, 7);
}

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("gvf round trip") {
  const corpus::Video v = sample_video();
  const std::string bytes = encode_gvf(v);
  CHECK(bytes.substr(0, 4) == "GVF1");
  CHECK(bytes.size() == kGvfHeaderBytes + v.prompt.size() + 7 * 16 * 16 * 3);
  const corpus::Video back = decode_gvf(bytes);
  CHECK(back.prompt == v.prompt);
  REQUIRE(back.frames.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(back.frames[i] == quantized(v.frames[i]));
  CHECK(encode_gvf(back) == bytes);

  for (int q = 0; q < 256; ++q) {
    CHECK(quantize(corpus::normalize_u8(static_cast<std::uint8_t>(q))) == q);
  }
  CHECK(quantize(-5.0f) == 0);
  CHECK(quantize(5.0f) == 255);

  const auto dir = testing::temp_dir("gvf");
  write_gvf(v, dir / "a.gvf");
  CHECK(fs::file_size(dir / "a.gvf") == bytes.size());
  CHECK(read_gvf(dir / "a.gvf").frames == back.frames);
}

TEST_CASE("gvf rejects corrupt input") {
  const std::string bytes = encode_gvf(sample_video());
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_gvf(bad), BadMagicError);
  CHECK_THROWS_AS(decode_gvf(bytes.substr(0, bytes.size() - 1)), TruncatedError);
  CHECK_THROWS_AS(decode_gvf(bytes.substr(0, 10)), TruncatedError);
  std::string huge = bytes;
  for (int i = 4; i < 12; ++i) huge[i] = '\xff';
  CHECK_THROWS_AS(decode_gvf(huge), DimensionOverflowError);
  CHECK_THROWS_AS(read_gvf("/nonexistent/x.gvf"), IoError);
}

TEST_CASE("streaming gvf writer") {
  const auto dir = testing::temp_dir("gvf_stream");
  const corpus::Video v = sample_video();
  {
    GvfStreamWriter w(dir / "s.gvf", 16, 16, 3, v.prompt);
    for (const Frame& f : v.frames) w.append(f);
    w.flush();
    CHECK(!fs::exists(dir / "s.gvf"));
    w.close();
  }
  CHECK(io::read_file(dir / "s.gvf") == encode_gvf(v));
  {
    GvfStreamWriter w(dir / "gone.gvf", 16, 16, 3, v.prompt);
    w.append(v.frames[0]);
  }
  CHECK(!fs::exists(dir / "gone.gvf"));
  GvfStreamWriter w(dir / "bad.gvf", 16, 16, 3, "");
  CHECK_THROWS_AS(w.append(Frame(8, 8, 3)), DimensionError);
}

TEST_CASE("checkpoint container") {
  std::mt19937_64 rng(1);
  Checkpoint c;
  c.role = "interp1";
  c.config = "seed=3\n";
  c.step = 42;
  c.tensors.push_back({"w", diffusion::ParamGroup::kConv, testing::random_tensor(rng, 2, 3, 3, 3)});
  c.tensors.push_back({"b", diffusion::ParamGroup::kOther, testing::random_tensor(rng, 1, 2, 1, 1)});
  const std::string bytes = encode_checkpoint(c);
  CHECK(bytes.substr(0, 4) == "GVCK");
  CHECK(decode_checkpoint(bytes) == c);
  std::string bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), BadMagicError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), TruncatedError);

  const auto dir = testing::temp_dir("ckpt");
  save_checkpoint(c, dir / "c.gvck");
  CHECK(load_checkpoint(dir / "c.gvck") == c);

  diffusion::Param w{"w", diffusion::ParamGroup::kConv, nn::Tensor(2, 3, 3, 3), nn::Tensor(2, 3, 3, 3)};
  diffusion::Param b{"b", diffusion::ParamGroup::kOther, nn::Tensor(1, 2, 1, 1), nn::Tensor(1, 2, 1, 1)};
  std::vector<diffusion::Param*> params{&w, &b};
  restore(params, c.tensors);
  CHECK(snapshot(params) == c.tensors);
  std::vector<diffusion::Param*> fewer{&w};
  CHECK_THROWS_AS(restore(fewer, c.tensors), ContractError);
}

TEST_CASE("run config") {
  const RunConfig d;
  CHECK(RunConfig::parse(d.to_text()) == d);
  const RunConfig c = RunConfig::parse(
      "# comment\n\ngrid_4x4 = true\nnon_ar=true\nfreeze=freeze_attn\nunet_widths=8,16,16\n"
      "guidance_scale=2.5\ncondition_policy=key_grid\nseed=9\n");
  CHECK(c.effective_grid_side() == 4);
  CHECK(c.non_ar);
  CHECK(c.freeze == diffusion::FreezeMode::kFreezeAttn);
  CHECK(c.unet_widths == std::vector<int>{8, 16, 16});
  CHECK(c.guidance_scale == 2.5);
  CHECK(c.seed == 9);
  CHECK(c.schedule_params().key_stride() == 15);
  CHECK(RunConfig::parse(c.to_text()) == c);
  CHECK_THROWS_AS(RunConfig::parse("learning_rat=0.1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed=abc\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("key_stride=7\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("latent_codec=vae\n"), ConfigError);
}

TEST_CASE("csv and svg") {
  const auto t = plot::parse_csv("n_frames,peak_frames,peak_bytes\n28,22,67584\n\n112,22,67584\n");
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 2);
  CHECK(t.column("peak_bytes") == 2);
  CHECK(t.column("nope") == -1);
  CHECK_THROWS_AS(plot::parse_csv("a,b\n1\n"), ParseError);
  CHECK_THROWS_AS(plot::parse_csv(""), ParseError);
  const std::string svg = plot::plot_csv("n_frames,peak_frames,peak_bytes\n28,22,67584\n");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(plot::plot_csv("metric,value,n_a,n_b,extractor\nfvd,3.5,4,4,x\n").find("fvd") !=
        std::string::npos);
  CHECK_THROWS_AS(plot::plot_csv("x,y\n1,2\n"), UnsupportedError);
}

TEST_CASE("command line") {
  const auto dir = testing::temp_dir("cli");
  const Run plan = cli("plan --frames 28", dir);
  REQUIRE(plan.code == 0);
  const auto j = nlohmann::json::parse(plan.out);
  CHECK(j["counts"]["key_grid"] == 1);
  CHECK(j["counts"]["level_1"] == 3);
  CHECK(j["counts"]["level_2"] == 9);

  const Run corpus_run =
      cli("corpus build --scenes 3 --frames 56 --seed 4 --out \"" + (dir / "data").string() + "\"", dir);
  REQUIRE(corpus_run.code == 0);
  CHECK(fs::exists(dir / "data"));

  const fs::path cfg = dir / "tiny.cfg";
  io::write_file_atomic(cfg, "unet_widths=8,8,8\nemb_dim=8\ngroups=2\nkey_steps=3\n"
                             "interp_steps=2\nnextkey_steps=3\nbatch_size=2\n");
  const fs::path ckpt = dir / "ckpt";
  for (const char* role : {"key", "interp1", "interp2", "nextkey"}) {
    const Run t = cli(std::string("train --role ") + role + " --data \"" + (dir / "data").string() +
                          "\" --config \"" + cfg.string() + "\" --out \"" + (ckpt / role).string() +
                          ".gvck\" --steps 2",
                      dir);
    REQUIRE_MESSAGE(t.code == 0, t.err);
  }
  CHECK(fs::exists(ckpt / "key.gvck"));

  const std::string gen_args = "generate --prompt \"a red square moving right slowly on a black "
                               "background\" --frames 30 --ckpt-dir \"" + ckpt.string() + "\" ";
  const fs::path set = dir / "set";
  fs::create_directories(set);
  REQUIRE(cli(gen_args + "--seed 3 --out \"" + (set / "g1.gvf").string() + "\" --manifest \"" +
                  (dir / "g1.json").string() + "\"",
              dir)
              .code == 0);
  REQUIRE(cli(gen_args + "--seed 3 --out \"" + (dir / "again.gvf").string() + "\"", dir).code == 0);
  REQUIRE(cli(gen_args + "--seed 4 --out \"" + (set / "g2.gvf").string() + "\"", dir).code == 0);
  CHECK(io::read_file(set / "g1.gvf") == io::read_file(dir / "again.gvf"));
  CHECK(read_gvf(set / "g1.gvf").frames.size() == 30);
  CHECK(nlohmann::json::parse(io::read_file(dir / "g1.json"))["n_frames"] == 30);

  const std::string s = "\"" + set.string() + "\"";
  const Run self = cli("evaluate --metric fvd --a " + s + " --b " + s + " --out -", dir);
  REQUIRE_MESSAGE(self.code == 0, self.err);
  CHECK(self.out.find("metric,value,n_a,n_b,extractor") == 0);
  CHECK(self.out.find("fvd,0,2,2,") != std::string::npos);
  const fs::path is_csv = dir / "is.csv";
  REQUIRE(cli("evaluate --metric is --a " + s + " --out \"" + is_csv.string() + "\"", dir).code == 0);
  CHECK(plot::parse_csv(io::read_file(is_csv)).rows.size() == 1);

  const Run bad_prompt = cli("generate --prompt \"a dog\" --frames 5 --seed 1 --ckpt-dir \"" +
                                 ckpt.string() + "\" --out x.gvf",
                             dir);
  CHECK(bad_prompt.code == static_cast<int>(ErrorKind::kParse));
  CHECK(bad_prompt.err.find("error kind=") != std::string::npos);

  const Run missing = cli("generate --prompt \"a red square standing still on a black background\" "
                          "--frames 5 --seed 1 --ckpt-dir \"" + (dir / "empty").string() + "\" --out x.gvf",
                          dir);
  CHECK(missing.code != 0);
  CHECK(cli("evaluate --metric nonsense --a x --out -", dir).code == 2);
  CHECK(cli("frobnicate", dir).code == 2);

  const Run probe = cli("memprobe --frames 28,56 --out \"" + (dir / "mem.csv").string() + "\"", dir);
  REQUIRE_MESSAGE(probe.code == 0, probe.err);
  REQUIRE(cli("plot --in \"" + (dir / "mem.csv").string() + "\" --out \"" +
                  (dir / "mem.svg").string() + "\"",
              dir)
              .code == 0);
  CHECK(io::read_file(dir / "mem.svg").find("<svg") != std::string::npos);
}

}  // TEST_SUITE
