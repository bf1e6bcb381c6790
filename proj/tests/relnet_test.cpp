/* Copyright 2026 The PSRN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "psrn/numcore/error.hpp"
#include "psrn/numcore/gradcheck.hpp"
#include "psrn/numcore/ops.hpp"
#include "psrn/relnet/relation.hpp"
#include "test_util.hpp"

namespace psrn {
namespace {

using namespace relnet;
using numcore::TensorBuffer;

constexpr std::size_t kPoseHalf = 3;
constexpr std::size_t kDepth = 4;
constexpr std::size_t kClasses = 5;

RelationConfig small_config() {
  RelationConfig cfg;
  cfg.width = 6;
  return cfg;
}

ParameterSet make_params(std::uint64_t seed) {
  ParameterSet params;
  std::mt19937_64 rng(seed);
  init_relation(params, small_config(), 2 * kPoseHalf, kDepth, kClasses, rng);
  // Small positive biases keep most ReLUs active.
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (auto& [name, p] : params.entries()) {
    if (name.ends_with("/b")) {
      for (double& v : p.tensor.values()) v = u(rng);
    }
  }
  return params;
}

struct Inputs {
  TensorBuffer h_l, h_v, objects;
};

Inputs random_inputs(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {testing::random_tensor({kPoseHalf}, rng),
          testing::random_tensor({kPoseHalf}, rng),
          testing::random_tensor({count, kDepth}, rng)};
}

RelationOutputs run(Tape& tape, ParameterSet& params, const Inputs& in) {
  return relation_forward(tape, params, small_config(),
                          tape.constant(in.h_l), tape.constant(in.h_v),
                          tape.constant(in.objects), kClasses);
}

std::vector<double> values(const Tape& tape, Var v) {
  return testing::to_vector(tape.value(v));
}

// Plain double loops over the same parameters.
std::vector<double> dense_relu(const ParameterSet& params,
                               const std::string& prefix, std::size_t layers,
                               std::vector<double> h, bool relu_last = true) {
  for (std::size_t layer = 0; layer < layers; ++layer) {
    const TensorBuffer& w = params.at(numcore::layer_weight_name(prefix, layer));
    const TensorBuffer& b = params.at(numcore::layer_bias_name(prefix, layer));
    std::vector<double> next(w.dim(0));
    for (std::size_t r = 0; r < w.dim(0); ++r) {
      double s = b.values()[r];
      for (std::size_t c = 0; c < w.dim(1); ++c) s += w.at(r, c) * h[c];
      next[r] = (relu_last || layer + 1 < layers) ? std::max(0.0, s) : s;
    }
    h = std::move(next);
  }
  return h;
}

std::vector<double> oracle_pooled(const ParameterSet& params, const Inputs& in) {
  std::vector<double> pooled(small_config().width, 0.0);
  for (std::size_t i = 0; i < in.objects.dim(0); ++i) {
    std::vector<double> x(in.h_l.values().begin(), in.h_l.values().end());
    x.insert(x.end(), in.h_v.values().begin(), in.h_v.values().end());
    for (std::size_t c = 0; c < kDepth; ++c) x.push_back(in.objects.at(i, c));
    const auto g = dense_relu(params, "relation/g", 4, x);
    for (std::size_t k = 0; k < g.size(); ++k) pooled[k] += g[k];
  }
  return pooled;
}

TEST(RelationTest, SingleObjectIsFOfG) {
  ParameterSet params = make_params(1);
  const Inputs in = random_inputs(1, 2);
  Tape tape;
  const RelationOutputs out = run(tape, params, in);
  const auto pooled = oracle_pooled(params, in);
  const auto r = dense_relu(params, "relation/f", 2, pooled);
  const auto rv = values(tape, out.relation);
  ASSERT_EQ(rv.size(), r.size());
  for (std::size_t k = 0; k < r.size(); ++k) EXPECT_NEAR(rv[k], r[k], 1e-12);
  const auto logits = dense_relu(params, "relation/cls", 1, r, false);
  const auto lv = values(tape, out.logits);
  ASSERT_EQ(lv.size(), kClasses);
  for (std::size_t k = 0; k < kClasses; ++k) {
    EXPECT_NEAR(lv[k], logits[k], 1e-12);
  }
}

TEST(RelationTest, ZeroParametersGiveLogC) {
  ParameterSet params = make_params(3);
  for (auto& [name, p] : params.entries()) {
    for (double& v : p.tensor.values()) v = 0.0;
  }
  const Inputs in = random_inputs(6, 4);
  Tape tape;
  const RelationOutputs out = run(tape, params, in);
  for (double v : tape.value(out.logits).values()) EXPECT_EQ(v, 0.0);
  const Var loss = numcore::cross_entropy(out.logits, 2);
  EXPECT_NEAR(tape.scalar(loss), std::log(static_cast<double>(kClasses)),
              1e-15);
}

TEST(RelationTest, SumMatchesPerObjectLoopAndDuplicationDoubles) {
  ParameterSet params = make_params(5);
  const Inputs in = random_inputs(4, 6);
  Inputs doubled = in;
  doubled.objects = TensorBuffer({8, kDepth});
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t c = 0; c < kDepth; ++c) {
      doubled.objects.at(i, c) = in.objects.at(i % 4, c);
    }
  }
  Tape tape;
  const auto once = values(tape, run(tape, params, in).pooled);
  const auto twice = values(tape, run(tape, params, doubled).pooled);
  const auto oracle = oracle_pooled(params, in);
  for (std::size_t k = 0; k < once.size(); ++k) {
    EXPECT_NEAR(once[k], oracle[k], 1e-12);
    EXPECT_NEAR(twice[k], 2.0 * oracle[k], 1e-12);
  }
}

TEST(RelationTest, EmptyObjectSetIsRejected) {
  // Zero-extent tensors cannot exist, so an empty object matrix never
  // reaches the sum.
  EXPECT_THROW(TensorBuffer(numcore::Shape{0, kDepth}), DimensionError);
}

TEST(RelationTest, PropertyObjectPermutationInvariance) {
  ParameterSet params = make_params(9);
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Inputs in = random_inputs(16, rng());
    std::vector<std::size_t> perm(16);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    Inputs shuffled = in;
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t c = 0; c < kDepth; ++c) {
        shuffled.objects.at(i, c) = in.objects.at(perm[i], c);
      }
    }
    Tape tape;
    const auto a = values(tape, run(tape, params, in).logits);
    const auto b = values(tape, run(tape, params, shuffled).logits);
    for (std::size_t k = 0; k < kClasses; ++k) ASSERT_NEAR(a[k], b[k], 1e-9);
    ASSERT_EQ(numcore::argmax(a), numcore::argmax(b));
  }
}

TEST(RelationTest, ZeroObjectsDependOnlyOnPose) {
  ParameterSet params = make_params(11);
  Inputs a = random_inputs(3, 12);
  for (double& v : a.objects.values()) v = 0.0;
  Inputs b = a;
  b.objects = TensorBuffer({3, kDepth});
  Tape tape;
  EXPECT_EQ(values(tape, run(tape, params, a).logits),
            values(tape, run(tape, params, b).logits));
  Inputs c = a;
  c.h_l.values()[0] += 0.5;
  EXPECT_NE(values(tape, run(tape, params, a).logits),
            values(tape, run(tape, params, c).logits));
}

TEST(RelationTest, GParameterCountIndependentOfGridSize) {
  ParameterSet params = make_params(13);
  const std::size_t before = params.scalar_count();
  Tape tape;
  run(tape, params, random_inputs(1, 14));
  run(tape, params, random_inputs(49, 15));
  EXPECT_EQ(params.scalar_count(), before);
}

TEST(RelationGradTest, FiniteDifferenceOnThreeObjects) {
  ParameterSet params = make_params(16);
  const Inputs in = random_inputs(3, 17);
  params.add("in/h_l", in.h_l);
  params.add("in/h_v", in.h_v);
  params.add("in/objects", in.objects);
  auto loss = [&](ParameterSet& p, numcore::GradMode mode) {
    Tape tape;
    const RelationOutputs out = relation_forward(
        tape, p, small_config(), tape.parameter(p, "in/h_l"),
        tape.parameter(p, "in/h_v"), tape.parameter(p, "in/objects"),
        kClasses);
    const Var l = numcore::cross_entropy(out.logits, 1);
    if (mode == numcore::GradMode::kAccumulate) tape.backward(l);
    return tape.scalar(l);
  };
  const auto report = numcore::grad_check(loss, params);
  for (const auto& t : report.tensors) EXPECT_LT(t.max_rel_error, 1e-4) << t.name;
  // Gradients reach every input as well as the weights.
  EXPECT_EQ(report.tensors.size(), params.size());
}

TEST(RelationGradTest, ZeroUpstreamGradientGivesZeroParameterGradients) {
  ParameterSet params = make_params(18);
  const Inputs in = random_inputs(3, 19);
  Tape tape;
  const RelationOutputs out = run(tape, params, in);
  // A loss with zero weight on the logits.
  const Var zero = tape.constant(TensorBuffer({1, kClasses}));
  tape.backward(numcore::affine(out.logits, zero, std::nullopt));
  for (auto& [name, p] : params.entries()) {
    for (double g : p.tensor.grad()) EXPECT_EQ(g, 0.0) << name;
  }
}

TEST(RelationGradTest, ObjectGradientIndependentOfOtherObjects) {
  // With a loss linear in the pooled sum, d/dx_i depends only on x_i.
  ParameterSet params = make_params(20);
  const Inputs in = random_inputs(4, 21);
  std::mt19937_64 rng(22);
  const TensorBuffer upstream =
      testing::random_tensor({1, small_config().width}, rng);
  auto object_grad = [&](const TensorBuffer& objects) {
    Tape tape;
    TensorBuffer obj = objects;
    const Var x = tape.bind(obj, true);
    const RelationOutputs out =
        relation_forward(tape, params, small_config(), tape.constant(in.h_l),
                         tape.constant(in.h_v), x, kClasses);
    tape.backward(numcore::affine(out.pooled, tape.constant(upstream),
                                  std::nullopt));
    std::vector<double> g(kDepth);
    for (std::size_t c = 0; c < kDepth; ++c) g[c] = obj.grad()[c];
    params.zero_grad();
    return g;
  };
  const auto base = object_grad(in.objects);
  TensorBuffer perturbed = in.objects;
  for (std::size_t i = 1; i < 4; ++i) {
    for (std::size_t c = 0; c < kDepth; ++c) perturbed.at(i, c) += 0.7;
  }
  const auto moved = object_grad(perturbed);
  for (std::size_t c = 0; c < kDepth; ++c) EXPECT_NEAR(base[c], moved[c], 1e-15);
}

}  // namespace
}  // namespace psrn
