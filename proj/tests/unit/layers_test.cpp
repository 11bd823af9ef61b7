// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include <functional>

#include "doctest.h"
#include "gridvid/corpus.hpp"
#include "gridvid/errors.hpp"
#include "gridvid/nn/layers.hpp"
#include "gridvid/nn/unet.hpp"
#include "support.hpp"

using namespace gridvid;
using namespace gridvid::nn;
using gridvid::testing::random_tensor;

namespace {

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * b[i];
  return s;
}

void randomize(std::vector<Param*> params, std::mt19937_64& rng, float stddev = 0.3f) {
  for (Param* p : params) {
    p->value.fill_normal(rng, stddev);
    p->grad.zero();
  }
}

// Compares accumulated parameter gradients with central differences of the
// scalar objective.
void check_param_grads(const std::vector<Param*>& params, const std::function<double()>& objective,
                       std::mt19937_64& rng, int probes_per_param = 2, double h = 1e-2,
                       double tol = 3e-2) {
  for (Param* p : params) {
    for (int k = 0; k < probes_per_param; ++k) {
      const std::size_t i = rng() % p->value.size();
      const float keep = p->value[i];
      p->value[i] = keep + static_cast<float>(h);
      const double up = objective();
      p->value[i] = keep - static_cast<float>(h);
      const double down = objective();
      p->value[i] = keep;
      const double fd = (up - down) / (2 * h);
      INFO(p->name << "[" << i << "] fd=" << fd << " analytic=" << p->grad[i]);
      CHECK(std::abs(fd - p->grad[i]) <= tol * std::max(1.0, std::abs(fd)));
    }
  }
}

}  // namespace

TEST_SUITE("layers") {

TEST_CASE("sinusoidal code") {
  std::vector<float> code(8);
  sinusoidal_code(0.0, 8, code.data());
  CHECK(code[0] == doctest::Approx(0.0));
  CHECK(code[1] == doctest::Approx(1.0));
  sinusoidal_code(3.0, 8, code.data());
  CHECK(code[0] == doctest::Approx(std::sin(3.0)));
  CHECK(code[1] == doctest::Approx(std::cos(3.0)));
}

TEST_CASE("conv init") {
  std::mt19937_64 rng(1);
  Conv2d zero("z", 4, 4, 3, 1, ParamGroup::kConv, rng, 0.0f);
  for (float v : zero.weight.value.span()) CHECK(v == 0.0f);
  Conv2d c("c", 4, 6, 3, 2, ParamGroup::kConv, rng);
  CHECK(c.weight.value.n() == 6);
  CHECK(c.weight.group == ParamGroup::kConv);
  const Tensor y = c.forward(Tensor(2, 4, 8, 8, 1.0f));
  CHECK(y.h() == 4);
  CHECK(y.c() == 6);
}

TEST_CASE("resblock gradients") {
  std::mt19937_64 rng(2);
  for (auto [cin, cout] : {std::pair{8, 8}, std::pair{8, 16}}) {
    ResBlock block("rb", cin, cout, 6, 4, rng);
    std::vector<Param*> params;
    block.collect(params);
    randomize(params, rng);
    const Tensor x = random_tensor(rng, 2, cin, 4, 4);
    const Tensor emb = random_tensor(rng, 2, 6, 1, 1);
    const Tensor r = random_tensor(rng, 2, cout, 4, 4);
    block.forward(x, emb);
    Tensor gemb(2, 6, 1, 1);
    const Tensor gx = block.backward(r, gemb);
    check_param_grads(params, [&] { return dot(block.forward(x, emb), r); }, rng);
    for (int k = 0; k < 6; ++k) {
      Tensor xp = x, xm = x;
      const std::size_t i = rng() % x.size();
      xp[i] += 0.01f;
      xm[i] -= 0.01f;
      const double fd = (dot(block.forward(xp, emb), r) - dot(block.forward(xm, emb), r)) / 0.02;
      CHECK(std::abs(fd - gx[i]) <= 3e-2 * std::max(1.0, std::abs(fd)));
      Tensor ep = emb, em = emb;
      const std::size_t j = rng() % emb.size();
      ep[j] += 0.01f;
      em[j] -= 0.01f;
      const double fe = (dot(block.forward(x, ep), r) - dot(block.forward(x, em), r)) / 0.02;
      CHECK(std::abs(fe - gemb[j]) <= 3e-2 * std::max(1.0, std::abs(fe)));
    }
  }
}

TEST_CASE("attention block gradients") {
  std::mt19937_64 rng(3);
  AttentionBlock block("attn", 8, 4, rng);
  std::vector<Param*> params;
  block.collect(params);
  for (Param* p : params) {
    if (p->name.find("norm") == std::string::npos) CHECK(p->group == ParamGroup::kAttention);
  }
  randomize(params, rng);
  const Tensor x = random_tensor(rng, 2, 8, 3, 3);
  const Tensor r = random_tensor(rng, 2, 8, 3, 3);
  block.forward(x);
  block.backward(r);
  check_param_grads(params, [&] { return dot(block.forward(x), r); }, rng);
}

TEST_CASE("zero-init attention output is the identity") {
  std::mt19937_64 rng(4);
  AttentionBlock block("attn", 8, 4, rng);
  const Tensor x = random_tensor(rng, 1, 8, 4, 4);
  CHECK(block.forward(x) == x);
}

TEST_CASE("prompt embedding") {
  std::mt19937_64 rng(5);
  PromptEmbedding emb("prompt", corpus::vocabulary_size(), 16, rng);
  const auto tokens = corpus::tokenize("a red square moving right slowly on a black background");
  const diffusion::PromptCode p{tokens, false, false, {}};
  const diffusion::PromptCode prefixed{tokens, true, false, {}};
  const diffusion::PromptCode other{
      corpus::tokenize("a blue square moving right slowly on a black background"), false, false, {}};
  const std::vector<diffusion::PromptCode> batch{p, p, prefixed, other, p.as_null(),
                                                 diffusion::PromptCode{}};
  const Tensor y = emb.forward(batch);
  REQUIRE(y.n() == 6);
  auto row = [&](int n) { return std::vector<float>(y.sample(n), y.sample(n) + 16); };
  CHECK(row(0) == row(1));
  CHECK(row(0) != row(2));
  CHECK(row(0) != row(3));
  CHECK(row(4) == row(5));
  const std::vector<diffusion::PromptCode> bad{{{corpus::vocabulary_size()}, false, false}};
  CHECK_THROWS_AS(emb.forward(bad), IndexError);

  std::vector<Param*> params;
  emb.collect(params);
  randomize(params, rng);
  const Tensor r = random_tensor(rng, 6, 16, 1, 1);
  emb.forward(batch);
  emb.backward(r);
  check_param_grads(params, [&] { return dot(emb.forward(batch), r); }, rng, 4);
}

TEST_CASE("unet contract") {
  UNetConfig cfg;
  cfg.base_channels = 12;
  cfg.image_conditions = 2;
  cfg.widths = {8, 8, 16};
  cfg.emb_dim = 16;
  cfg.groups = 4;
  UNetDenoiser net(cfg);
  CHECK(net.input_channels() == 36);
  std::mt19937_64 rng(6);
  const Tensor x = random_tensor(rng, 2, 36, 8, 8);
  const std::vector<int> ts{5, 100};
  const std::vector<diffusion::PromptCode> prompts(2);
  const Tensor y = net.predict(x, ts, prompts);
  CHECK(y.c() == 12);
  CHECK(y.h() == 8);
  CHECK(net.activation_bytes() > 0);
  CHECK_THROWS_AS(net.predict(random_tensor(rng, 2, 24, 8, 8), ts, prompts), DimensionError);
  CHECK_THROWS_AS(net.predict(random_tensor(rng, 2, 36, 6, 6), ts, prompts), DimensionError);
  CHECK_THROWS_AS(net.predict(x, std::vector<int>{1}, prompts), ArityError);
  // Zero-initialized output convolution.
  for (float v : y.span()) CHECK(v == 0.0f);

  UNetDenoiser again(cfg);
  CHECK(again.predict(x, ts, prompts) == y);
  std::size_t total = 0;
  for (Param* p : net.parameters()) total += p->value.size();
  CHECK(total == net.parameter_count());
}

TEST_CASE("unet parameter gradients") {
  UNetConfig cfg;
  cfg.base_channels = 4;
  cfg.image_conditions = 1;
  cfg.widths = {8, 8, 8};
  cfg.emb_dim = 8;
  cfg.groups = 2;
  UNetDenoiser net(cfg);
  std::mt19937_64 rng(7);
  randomize(net.parameters(), rng, 0.2f);
  for (Param* p : net.parameters()) {
    if (p->name.find("gamma") != std::string::npos) p->value.fill(1.0f);
  }
  const Tensor x = random_tensor(rng, 2, 8, 8, 8);
  const std::vector<int> ts{3, 150};
  const auto tokens = corpus::tokenize("a red circle standing still on a gray background");
  const std::vector<diffusion::PromptCode> prompts{{tokens, true, false}, {tokens, false, true}};
  const Tensor r = random_tensor(rng, 2, 4, 8, 8);
  net.predict(x, ts, prompts);
  net.backward(r);
  std::vector<Param*> probe;
  for (Param* p : net.parameters()) {
    if (p->name.find(".tokens") == std::string::npos) probe.push_back(p);
  }
  check_param_grads(probe, [&] { return dot(net.predict(x, ts, prompts), r); }, rng, 1, 1e-2,
                    5e-2);
}

}  // TEST_SUITE
