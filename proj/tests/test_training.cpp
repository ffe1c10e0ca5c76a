#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "holograph/errors.hpp"
#include "holograph/training.hpp"
#include "support.hpp"

using namespace holograph;
using namespace holograph::test;

TEST_CASE("uniform detector sums give the symmetric-softmax loss") {
  std::vector<double> sums(7, 3.25);
  for (std::uint32_t t = 0; t < 7; ++t) {
    auto rep = loss(sums, t);
    CHECK(rep.loss == doctest::Approx(6.0 / 49.0).epsilon(1e-12));
    for (double p : rep.softmax_probs) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  }
}

TEST_CASE("saturating softmax drives the loss to zero monotonically") {
  double prev = 1e9;
  for (double M : {1.0, 5.0, 20.0, 80.0}) {
    std::vector<double> sums(5, 0.0);
    sums[0] = M;
    const double l = loss(sums, 0).loss;
    CHECK(l < prev);
    prev = l;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("loss matches an extended-precision recomputation") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> sums(4);
    for (auto& s : sums) s = 10.0 * rng.next_unit() - 5.0;
    const std::uint32_t target = static_cast<std::uint32_t>(rng.next_below(4));
    auto rep = loss(sums, target);

    long double mx = sums[0];
    for (double s : sums) mx = std::max<long double>(mx, s);
    long double total = 0.0L;
    std::vector<long double> p(4);
    for (int c = 0; c < 4; ++c) {
      p[c] = std::exp(static_cast<long double>(sums[c]) - mx);
      total += p[c];
    }
    long double want = 0.0L;
    for (int c = 0; c < 4; ++c) {
      const long double d = p[c] / total - (static_cast<std::uint32_t>(c) == target ? 1.0L : 0.0L);
      want += d * d;
    }
    want /= 4.0L;
    CHECK(std::abs(rep.loss - static_cast<double>(want)) < 1e-12);

    double psum = 0.0;
    for (double q : rep.softmax_probs) psum += q;
    CHECK(std::abs(psum - 1.0) < 1e-12);
    CHECK(rep.loss >= 0.0);
    CHECK(rep.loss <= 2.0 / 4.0);
  }
}

TEST_CASE("loss validates its arguments") {
  CHECK_THROWS_AS(loss({1.0, 2.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(loss({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(loss({1.0, std::nan("")}, 0), NumericError);
}

TEST_CASE("loss and gradient are shift-invariant in the detector sums") {
  std::vector<double> sums{0.4, 1.9, -0.3, 0.8};
  std::vector<double> shifted(sums);
  for (auto& s : shifted) s += 17.3;
  auto a = loss(sums, 2);
  auto b = loss(shifted, 2);
  CHECK(std::abs(a.loss - b.loss) < 1e-12);
  auto ga = loss_grad(a.softmax_probs, 2);
  auto gb = loss_grad(b.softmax_probs, 2);
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] - gb[i]) < 1e-12);
}

TEST_CASE("loss_grad matches finite differences on the sums") {
  Rng rng(42);
  std::vector<double> sums(5);
  for (auto& s : sums) s = 4.0 * rng.next_unit() - 2.0;
  const std::uint32_t target = 3;
  auto g = loss_grad(loss(sums, target).softmax_probs, target);
  const double h = 1e-7;
  for (std::size_t j = 0; j < sums.size(); ++j) {
    auto plus = sums, minus = sums;
    plus[j] += h;
    minus[j] -= h;
    const double fd = (loss(plus, target).loss - loss(minus, target).loss) / (2.0 * h);
    CHECK(std::abs(fd - g[j]) < 1e-8);
  }
}

TEST_CASE("grad_check passes on the stock small network") {
  auto cfg = grad_check_config(7);
  GradCheckOptions opts;
  opts.seed = 7;
  auto rep = grad_check(cfg, opts);
  CHECK(rep.params_checked >= 64);
  CHECK(rep.max_rel_err <= 1e-5);
  CHECK(rep.median_rel_err <= rep.max_rel_err);
  CHECK(rep.passed);

  // zero-phase variant of the same topology
  auto zero_cfg = cfg;
  for (auto& m : zero_cfg.masks)
    for (auto& t : m.theta) t = 0.0;
  auto rep0 = grad_check(zero_cfg, opts);
  CHECK(rep0.max_rel_err <= 1e-5);

  // deterministic given the seed
  auto rep2 = grad_check(cfg, opts);
  CHECK(rep2.max_rel_err == rep.max_rel_err);
  CHECK(rep2.median_rel_err == rep.median_rel_err);
}

TEST_CASE("backward through normalized detector sums matches finite differences") {
  auto cfg = grad_check_config(9);
  Rng rng(43);
  auto input = random_unit_field(16, rng);
  auto plan = make_plan(cfg);
  auto fwd = forward_with_plan(plan, input);
  auto res = backward_with_plan(plan, cfg.detector, true, fwd, 1);

  auto masks = cfg.masks;
  auto eval = [&]() {
    plan.set_masks(masks);
    auto f = forward_with_plan(plan, input);
    auto sums = detect(f.intensity_map, 16, cfg.detector, true);
    return loss(sums, 1).loss;
  };
  const double h = 1e-6;
  Rng pick(44);
  for (int s = 0; s < 8; ++s) {
    const std::size_t l = pick.next_below(2);
    const std::size_t px = pick.next_below(256);
    const double t0 = masks[l].theta[px];
    masks[l].theta[px] = t0 + h;
    const double lp = eval();
    masks[l].theta[px] = t0 - h;
    const double lm = eval();
    masks[l].theta[px] = t0;
    const double fd = (lp - lm) / (2.0 * h);
    const double an = res.grads[l][px];
    CHECK(std::abs(fd - an) < 1e-6 * std::max({std::abs(fd), std::abs(an), 1e-3}));
  }
}

TEST_CASE("batch gradient equals the mean of per-sample gradients") {
  auto cfg = grad_check_config(11);
  Rng rng(45);
  std::vector<ComplexField> inputs;
  std::vector<std::uint32_t> targets{0, 1, 0};
  for (int i = 0; i < 3; ++i) inputs.push_back(random_unit_field(16, rng));

  auto plan = make_plan(cfg);
  std::vector<GradientResult> per;
  for (int i = 0; i < 3; ++i)
    per.push_back(
        backward_with_plan(plan, cfg.detector, false, forward_with_plan(plan, inputs[i]),
                           targets[i]));

  // FD of the batch-mean loss at a few coordinates equals the mean gradient.
  auto masks = cfg.masks;
  auto batch_loss = [&]() {
    plan.set_masks(masks);
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      auto f = forward_with_plan(plan, inputs[i]);
      acc += loss(detect(f.intensity_map, 16, cfg.detector), targets[i]).loss;
    }
    return acc / 3.0;
  };
  const double h = 1e-6;
  Rng pick(46);
  for (int s = 0; s < 6; ++s) {
    const std::size_t l = pick.next_below(2);
    const std::size_t px = pick.next_below(256);
    const double mean_an =
        (per[0].grads[l][px] + per[1].grads[l][px] + per[2].grads[l][px]) / 3.0;
    const double t0 = masks[l].theta[px];
    masks[l].theta[px] = t0 + h;
    const double lp = batch_loss();
    masks[l].theta[px] = t0 - h;
    const double lm = batch_loss();
    masks[l].theta[px] = t0;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(std::abs(fd - mean_an) < 1e-6 * std::max({std::abs(fd), std::abs(mean_an), 1e-3}));
  }
}

TEST_CASE("theta pixels the detector sums cannot see get exactly zero gradient") {
  // z = 0 keeps propagation the literal identity. Then no mask pixel can
  // change any detected intensity (|f e^{i theta}|^2 is theta-free), so every
  // gradient entry must be exactly zero — including at the detector pixels.
  NetworkConfig cfg;
  cfg.grid = {8, 36e-6, 532e-9};
  cfg.layer_distance = 0.0;
  cfg.num_layers = 1;
  cfg.feature_layers = 1;
  cfg.masks.assign(1, PhaseMask(8));
  cfg.detector.regions = {{1, 1, 1, 1}, {5, 5, 1, 1}};

  Rng rng(47);
  ComplexField input(8);
  for (auto& v : input.a) v = {rng.next_unit() + 0.1, rng.next_unit()};

  auto res = backward(cfg, input, 0);
  for (std::uint32_t r = 0; r < 8; ++r)
    for (std::uint32_t c = 0; c < 8; ++c) {
      const bool detector_px = (r == 1 && c == 1) || (r == 5 && c == 5);
      if (detector_px)  // mathematically zero; triple-product rounding only
        CHECK(std::abs(res.grads[0][r * 8 + c]) < 1e-15);
      else  // zero cotangent -> exact zero
        CHECK(res.grads[0][r * 8 + c] == 0.0);
    }

  // With propagation after the mask the same pixels do matter.
  cfg.layer_distance = 0.001;
  auto res2 = backward(cfg, input, 0);
  double biggest = 0.0;
  for (std::size_t i = 0; i < 64; ++i) biggest = std::max(biggest, std::abs(res2.grads[0][i]));
  CHECK(biggest > 0.0);
}

TEST_CASE("backward reports non-finite gradients with the layer") {
  NetworkConfig cfg;
  cfg.grid = {8, 36e-6, 532e-9};
  cfg.layer_distance = 0.0;
  cfg.num_layers = 1;
  cfg.feature_layers = 1;
  cfg.masks.assign(1, PhaseMask(8));
  cfg.detector.regions = {{1, 1, 1, 1}, {5, 5, 1, 1}};

  ComplexField input(8);
  input.at(1, 1) = {0.5, 0.0};
  input.at(5, 5) = {0.25, 0.0};
  input.at(0, 7) = {std::nan(""), 0.0};  // poisons a pixel no detector reads

  CHECK_THROWS_AS(backward(cfg, input, 0), NumericError);
  try {
    backward(cfg, input, 0);
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("adam step handles the trivial cases") {
  GridSpec grid{4, 36e-6, 532e-9};
  Hyperparams hyper;
  auto st = init_state(grid, 2, 5, hyper);
  auto before = st.masks;

  // zero gradient, zero moments: parameters hold still
  std::vector<std::vector<double>> zero(2, std::vector<double>(16, 0.0));
  step(st, zero);
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 16; ++i) CHECK(st.masks[l].theta[i] == before[l].theta[i]);

  // lr = 0: parameters frozen, moments move
  auto st2 = init_state(grid, 1, 6, hyper);
  st2.hyper.learning_rate = 0.0;
  std::vector<std::vector<double>> g(1, std::vector<double>(16, 2.0));
  auto frozen = st2.masks;
  step(st2, g);
  for (int i = 0; i < 16; ++i) CHECK(st2.masks[0].theta[i] == frozen[0].theta[i]);
  CHECK(st2.moments.m[0][0] != 0.0);
  CHECK(st2.moments.v[0][0] != 0.0);

  // shape mismatch rejected
  std::vector<std::vector<double>> bad(1, std::vector<double>(9, 0.0));
  CHECK_THROWS_AS(step(st2, bad), std::invalid_argument);
}

TEST_CASE("adam matches a hand-computed scalar trajectory") {
  GridSpec grid{1, 36e-6, 532e-9};
  Hyperparams hyper;  // lr 0.01, betas 0.9/0.999, eps 1e-8
  TrainState st;
  st.hyper = hyper;
  st.masks.assign(1, PhaseMask(1));
  st.moments.m.assign(1, std::vector<double>(1, 0.0));
  st.moments.v.assign(1, std::vector<double>(1, 0.0));

  double theta = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    step(st, {{1.0}});
    m = 0.9 * m + 0.1 * 1.0;
    v = 0.999 * v + 0.001 * 1.0;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    theta -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(st.masks[0].theta[0] == doctest::Approx(theta).epsilon(1e-14));
  }
  // first step of Adam on a constant unit gradient is -lr within epsilon
  CHECK(std::abs(theta * 5.0 / 5.0) > 0.0);
}

namespace {

// Micro two-class task: the class decides which side of the grid is lit.
// Linearly separable at the detector with near-zero propagation mixing.
FitDataset micro_dataset(std::uint32_t count_per_class) {
  FitDataset data;
  const std::uint32_t total = 2 * count_per_class;
  data.labels.resize(total);
  for (std::uint32_t i = 0; i < total; ++i) data.labels[i] = i % 2;
  data.encode = [](std::uint32_t node) {
    ComplexField f(16);
    Rng rng(1000 + node);
    const std::uint32_t cls = node % 2;
    const std::uint32_t col0 = cls == 0 ? 2 : 10;
    for (std::uint32_t r = 2; r < 6; ++r)
      for (std::uint32_t c = col0; c < col0 + 4; ++c)
        f.at(r, c) = {0.8 + 0.4 * rng.next_unit(), 0.0};
    return f;
  };
  for (std::uint32_t i = 0; i < total; ++i)
    (i < total - 8 ? data.train_ids : data.test_ids).push_back(i);
  return data;
}

NetworkConfig micro_config() {
  NetworkConfig cfg;
  cfg.grid = {16, 36e-6, 532e-9};
  cfg.layer_distance = 0.001;
  cfg.num_layers = 2;
  cfg.feature_layers = 2;
  cfg.masks.assign(2, PhaseMask(16));
  cfg.detector = DetectorLayout::uniform(16, 2, 4);
  return cfg;
}

}  // namespace

TEST_CASE("fit with lr=0 leaves parameters and accuracy untouched") {
  auto cfg = micro_config();
  auto data = micro_dataset(14);
  Hyperparams hyper;
  hyper.learning_rate = 0.0;
  hyper.epochs = 2;
  hyper.batch_size = 8;
  auto st = init_state(cfg.grid, cfg.num_layers, 3, hyper);
  auto masks0 = st.masks;

  NetworkConfig eval_cfg = cfg;
  eval_cfg.masks = masks0;
  const double untrained = evaluate_accuracy(eval_cfg, data, data.test_ids);

  FitOptions opts;
  opts.deterministic = true;
  auto res = fit(cfg, st, data, opts);
  REQUIRE(res.history.size() == 2);
  CHECK(res.history[0].test_acc == untrained);
  CHECK(res.history[1].test_acc == untrained);
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 256; ++i)
      CHECK(res.state.masks[l].theta[i] == masks0[l].theta[i]);
}

TEST_CASE("fit learns the separable micro task and is seed-deterministic") {
  auto cfg = micro_config();
  auto data = micro_dataset(14);
  Hyperparams hyper;
  hyper.epochs = 30;
  hyper.batch_size = 10;
  auto st = init_state(cfg.grid, cfg.num_layers, 21, hyper);

  FitOptions opts;
  opts.deterministic = true;
  auto a = fit(cfg, st, data, opts);
  auto b = fit(cfg, init_state(cfg.grid, cfg.num_layers, 21, hyper), data, opts);

  REQUIRE(a.history.size() == 30);
  CHECK(a.history.back().train_loss < a.history.front().train_loss);
  CHECK(a.history.back().train_acc >= 0.9);

  for (std::size_t e = 0; e < a.history.size(); ++e) {
    CHECK(a.history[e].train_loss == b.history[e].train_loss);
    CHECK(a.history[e].train_acc == b.history[e].train_acc);
    CHECK(a.history[e].test_acc == b.history[e].test_acc);
  }
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 256; ++i)
      CHECK(a.state.masks[l].theta[i] == b.state.masks[l].theta[i]);
}

TEST_CASE("evaluate_accuracy rejects an empty id list") {
  auto cfg = micro_config();
  auto st = init_state(cfg.grid, cfg.num_layers, 3, Hyperparams{});
  cfg.masks = st.masks;
  auto data = micro_dataset(4);
  CHECK_THROWS_AS(evaluate_accuracy(cfg, data, {}), std::invalid_argument);
}
