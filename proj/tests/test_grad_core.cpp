#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "hyst/grad_check.hpp"
#include "hyst/tape.hpp"
#include "test_util.hpp"

using namespace hyst;
using hyst::test::LD;
using hyst::test::random_tensor;

namespace {

using Builder = std::function<ad::Var<LD>(ad::Tape<LD>&, const std::vector<ad::Var<LD>>&)>;

// Scalarizes a primitive's output with fixed random weights and compares the
// tape gradient of every input coordinate with central differences.
LD primitive_error(const Builder& build, const std::vector<ad::Tensor<LD>>& inputs, std::mt19937_64& g) {
  ad::Tensor<LD> weights;
  const auto loss_of = [&](const std::vector<ad::Tensor<LD>>& in, std::vector<ad::Tensor<LD>>* grads) {
    ad::Tape<LD> tape;
    std::vector<ad::Var<LD>> vars;
    for (const auto& t : in) vars.push_back(tape.variable(t));
    const auto out = build(tape, vars);
    if (weights.size() == 0) weights = random_tensor<LD>(g, out.size(), 0, -1.0, 1.0);
    const auto loss = out.size() == 1 ? out : sum(cwise_product(tape.constant(weights), out));
    if (grads) {
      tape.backward(loss);
      for (auto v : vars) grads->push_back(tape.gradient(v));
    }
    return loss.scalar();
  };

  std::vector<ad::Tensor<LD>> grads;
  loss_of(inputs, &grads);
  std::vector<LD> flat, flat_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (ad::Index i = 0; i < inputs[k].size(); ++i) {
      flat.push_back(inputs[k].flat()(i));
      flat_grad.push_back(grads[k].flat()(i));
    }
  }
  auto work = inputs;
  const auto f = [&](std::span<const LD> p) {
    std::size_t n = 0;
    for (auto& t : work) {
      for (ad::Index i = 0; i < t.size(); ++i) t.flat()(i) = p[n++];
    }
    return loss_of(work, nullptr);
  };
  return grad_check<LD>(f, flat, flat_grad, 1e-3L).max_rel_error;
}

void check_primitive(const char* name, int arity, bool matrix_first, const Builder& build) {
  std::mt19937_64 g(0xC0FFEE);
  std::uniform_int_distribution<int> len(1, 6);
  LD worst = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const int n = len(g);
    std::vector<ad::Tensor<LD>> inputs;
    if (matrix_first) {
      const int rows = len(g);
      inputs.push_back(random_tensor<LD>(g, rows, n, -2.0, 2.0));
      inputs.push_back(random_tensor<LD>(g, n, 0, -2.0, 2.0));
    } else {
      for (int a = 0; a < arity; ++a) inputs.push_back(random_tensor<LD>(g, n, 0, -2.0, 2.0));
    }
    worst = std::max(worst, primitive_error(build, inputs, g));
  }
  INFO(name << " worst relative error " << static_cast<double>(worst));
  CHECK(worst <= 1e-7L);
}

}  // namespace

TEST_CASE("abs_square examples") {
  ad::Tape<double> tape;
  const auto x = tape.variable(ad::Tensor<double>::from_vector(Eigen::Vector3d(-2, 0, 3)));
  const auto y = abs_square(x);
  CHECK(y.value().flat() == Eigen::Vector3d(4, 0, 9));
  tape.backward(sum(y));
  CHECK(tape.gradient(x).flat()(0) == -4.0);
}

TEST_CASE("mse_loss examples") {
  ad::Tape<double> tape;
  CHECK(mse_loss(tape.constant({1.0, 1.0}), tape.constant({0.0, 2.0})).scalar() == 1.0);
  CHECK(mse_loss(tape.constant({0.3, -1.5}), tape.constant({0.3, -1.5})).scalar() == 0.0);
  std::mt19937_64 g(5);
  for (int i = 0; i < 50; ++i) {
    const auto a = test::uniform_vector(g, 4, -3, 3);
    const auto b = test::uniform_vector(g, 4, -3, 3);
    CHECK(mse_loss(tape.constant(std::span<const double>(a)), tape.constant(std::span<const double>(b))).scalar() >=
          0.0);
  }
}

TEST_CASE("sum backward yields ones") {
  ad::Tape<double> tape;
  const auto x = tape.variable(ad::Tensor<double>::from_vector(Eigen::Vector4d(0.1, -7, 3, 2)));
  tape.backward(sum(x));
  CHECK(tape.gradient(x).flat() == Eigen::Vector4d::Ones());
}

TEST_CASE("backward rejects non-scalar loss") {
  ad::Tape<double> tape;
  const auto x = tape.variable(ad::Tensor<double>::from_vector(Eigen::Vector2d(1, 2)));
  CHECK_THROWS_AS(tape.backward(tanh(x)), std::invalid_argument);
}

TEST_CASE("readout gradient matches closed form") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_tensor<double>(g, 1, 5, -1, 1);
    const auto y = random_tensor<double>(g, 5, 0, -1, 1);
    const double t = std::uniform_real_distribution<double>(-1, 1)(g);
    ad::Tape<double> tape;
    const auto Q = tape.variable(q);
    const auto pred = Q * tape.constant(y);
    tape.backward(mse_loss(pred, tape.constant({t})));
    const double residual = (q.mat() * y.flat())(0) - t;
    const Eigen::RowVectorXd expected = 2.0 / 1.0 * residual * y.flat().transpose();
    CHECK((tape.gradient(Q).mat() - expected).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("primitive adjoints match central differences") {
  const auto unary = [](auto op) {
    return Builder([op](ad::Tape<LD>&, const std::vector<ad::Var<LD>>& v) { return op(v[0]); });
  };
  check_primitive("matvec", 2, true, [](ad::Tape<LD>&, const auto& v) { return v[0] * v[1]; });
  check_primitive("add", 2, false, [](ad::Tape<LD>&, const auto& v) { return v[0] + v[1]; });
  check_primitive("sub", 2, false, [](ad::Tape<LD>&, const auto& v) { return v[0] - v[1]; });
  check_primitive("mul", 2, false, [](ad::Tape<LD>&, const auto& v) { return cwise_product(v[0], v[1]); });
  check_primitive("scale", 1, false, unary([](ad::Var<LD> a) { return LD(-1.7) * a; }));
  check_primitive("tanh", 1, false, unary([](ad::Var<LD> a) { return tanh(a); }));
  check_primitive("sigmoid", 1, false, unary([](ad::Var<LD> a) { return sigmoid(a); }));
  check_primitive("abs_square", 1, false, unary([](ad::Var<LD> a) { return abs_square(a); }));
  check_primitive("sum", 1, false, unary([](ad::Var<LD> a) { return sum(a); }));
  check_primitive("mse", 2, false, [](ad::Tape<LD>&, const auto& v) { return mse_loss(v[0], v[1]); });
  check_primitive("concat", 2, false, [](ad::Tape<LD>& t, const auto& v) {
    const std::array<ad::Var<LD>, 2> parts{v[0], v[1]};
    return t.concat(parts);
  });
}

TEST_CASE("backward is linear in the loss") {
  std::mt19937_64 g(17);
  const auto w = random_tensor<double>(g, 3, 4, -1, 1);
  const auto x = random_tensor<double>(g, 4, 0, -1, 1);
  const auto grad_of = [&](double c) {
    ad::Tape<double> tape;
    const auto W = tape.variable(w);
    const auto loss = sum(c * tanh(W * tape.constant(x)));
    tape.backward(loss);
    return tape.gradient(W);
  };
  const auto g1 = grad_of(1.0);
  const auto g3 = grad_of(3.0);
  CHECK((g3.flat() - 3.0 * g1.flat()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("tape replay is bitwise deterministic") {
  std::mt19937_64 g(23);
  const auto w = random_tensor<double>(g, 6, 6, -1, 1);
  const auto x = random_tensor<double>(g, 6, 0, -1, 1);
  const auto run = [&] {
    ad::Tape<double> tape;
    const auto W = tape.variable(w);
    auto h = tape.constant(x);
    for (int i = 0; i < 30; ++i) h = tanh(W * h + abs_square(h));
    tape.backward(sum(h));
    return tape.gradient(W);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.flat() == b.flat());
}

TEST_CASE("full-length BPTT gradient matches central differences") {
  // 595-point trace: 594 teacher-forced steps on a 4-unit HystRNN.
  std::mt19937_64 g(31);
  TrainingPairs pairs;
  for (int j = 0; j < 594; ++j) {
    const double s = std::sin(2 * M_PI * j / 594.0);
    pairs.inputs.push_back(s);
    pairs.inputs.push_back(std::tanh(2 * std::sin(2 * M_PI * (j - 1) / 594.0 + 0.4)));
    pairs.targets.push_back(std::tanh(2 * std::sin(2 * M_PI * j / 594.0 + 0.4)));
  }
  const auto params = init_params(CellKind::hystrnn, 4, 3).cast<LD>();
  const auto r = sequence_grad_check<LD>(params, pairs, 1e-5L);
  INFO("worst " << static_cast<double>(r.max_rel_error) << " at " << r.worst_index);
  CHECK(r.max_rel_error <= 1e-5L);
}
