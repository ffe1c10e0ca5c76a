#include "holograph/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "holograph/errors.hpp"
#include "holograph/rng.hpp"

namespace holograph {

namespace {

std::uint32_t resolve_threads(std::uint32_t requested) {
  if (requested) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Contiguous-chunk parallel loop. Chunks are fixed by (count, threads), so
// any per-index outputs land in deterministic slots.
void parallel_for(std::size_t count, std::uint32_t threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

void add_into(ComplexField& acc, const ComplexField& x) {
  for (std::size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += x.a[i];
}

double loss_of_sums(const std::vector<double>& raw, bool normalize, std::uint32_t target) {
  if (!normalize) return loss(raw, target).loss;
  double total = 0.0;
  for (double s : raw) total += s;
  if (total <= 0.0) return loss(raw, target).loss;
  std::vector<double> scaled(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = raw[i] / total;
  return loss(scaled, target).loss;
}

}  // namespace

TrainState init_state(const GridSpec& grid, std::uint32_t num_layers, std::uint64_t seed,
                      const Hyperparams& hyper) {
  TrainState st;
  st.rng_seed = seed;
  st.hyper = hyper;
  Rng rng = Rng::stream(seed, "init");
  st.masks.assign(num_layers, PhaseMask(grid.n));
  for (auto& mask : st.masks)
    for (auto& t : mask.theta) t = 2.0 * std::numbers::pi * rng.next_unit();
  st.moments.m.assign(num_layers, std::vector<double>(grid.pixels(), 0.0));
  st.moments.v.assign(num_layers, std::vector<double>(grid.pixels(), 0.0));
  return st;
}

LossReport loss(const std::vector<double>& detector_sums, std::uint32_t target) {
  const std::size_t C = detector_sums.size();
  if (C < 2) throw std::invalid_argument("loss needs at least two classes");
  if (target >= C) throw std::invalid_argument("target class out of range");

  double mx = detector_sums[0];
  for (double s : detector_sums) {
    if (!std::isfinite(s)) throw NumericError("non-finite detector sum");
    mx = std::max(mx, s);
  }
  LossReport rep;
  rep.softmax_probs.resize(C);
  double total = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    rep.softmax_probs[c] = std::exp(detector_sums[c] - mx);
    total += rep.softmax_probs[c];
  }
  double l = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    rep.softmax_probs[c] /= total;
    const double diff = rep.softmax_probs[c] - (c == target ? 1.0 : 0.0);
    l += diff * diff;
    if (rep.softmax_probs[c] > rep.softmax_probs[rep.predicted]) rep.predicted = c;
  }
  rep.loss = l / static_cast<double>(C);
  return rep;
}

std::vector<double> loss_grad(const std::vector<double>& softmax_probs, std::uint32_t target) {
  const std::size_t C = softmax_probs.size();
  // dl/dp_c = (2/C)(p_c - t_c); through the softmax Jacobian:
  // dl/ds_j = p_j * (dl/dp_j - sum_c dl/dp_c * p_c).
  double dot = 0.0;
  std::vector<double> dp(C);
  for (std::size_t c = 0; c < C; ++c) {
    dp[c] = (2.0 / C) * (softmax_probs[c] - (c == target ? 1.0 : 0.0));
    dot += dp[c] * softmax_probs[c];
  }
  std::vector<double> g(C);
  for (std::size_t j = 0; j < C; ++j) g[j] = softmax_probs[j] * (dp[j] - dot);
  return g;
}

GradientResult backward_with_plan(const NetworkPlan& plan, const DetectorLayout& detector,
                                  bool normalize_detector, const ForwardResult& fwd,
                                  std::uint32_t target) {
  const std::uint32_t n = plan.grid.n;
  const std::uint32_t L = plan.num_layers;
  if (fwd.stations.size() != L + 1)
    throw std::invalid_argument("forward result does not match plan layer count");

  auto raw = detect(fwd.intensity_map, n, detector, false);
  std::vector<double> sums = raw;
  double total = 0.0;
  const bool scaled = normalize_detector;
  if (scaled) {
    for (double s : raw) total += s;
    if (total > 0.0)
      for (auto& s : sums) s /= total;
  }

  GradientResult res;
  res.report = loss(sums, target);
  auto gs = loss_grad(res.report.softmax_probs, target);

  if (scaled && total > 0.0) {
    // s_i = r_i / T: dl/dr_i = (g_i - sum_j g_j s_j) / T.
    double dot = 0.0;
    for (std::size_t j = 0; j < gs.size(); ++j) dot += gs[j] * sums[j];
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] = (gs[i] - dot) / total;
  }

  // Region sums -> per-pixel intensity cotangent.
  std::vector<double> gI(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t k = 0; k < detector.regions.size(); ++k) {
    const auto& reg = detector.regions[k];
    for (std::uint32_t r = 0; r < reg.height; ++r) {
      double* row = gI.data() + static_cast<std::size_t>(reg.row0 + r) * n + reg.col0;
      for (std::uint32_t c = 0; c < reg.width; ++c) row[c] += gs[k];
    }
  }

  // Intensity -> field: bar f = 2 g f.
  std::vector<ComplexField> cot(L + 1, ComplexField(n));
  const auto& out_last = fwd.stations[L];
  for (std::size_t i = 0; i < out_last.a.size(); ++i)
    cot[L].a[i] = 2.0 * gI[i] * out_last.a[i];

  res.grads.resize(L);
  for (std::uint32_t layer = L; layer >= 1; --layer) {
    const auto& out = fwd.stations[layer];
    const auto& cbar = cot[layer];

    // dl/dtheta = Im(conj(out) * cotangent); the e^{i theta} factor puts the
    // whole theta-sensitivity in the output's phase.
    auto& g = res.grads[layer - 1];
    g.resize(out.a.size());
    bool finite = true;
    for (std::size_t i = 0; i < out.a.size(); ++i) {
      g[i] = std::imag(std::conj(out.a[i]) * cbar.a[i]);
      finite = finite && std::isfinite(g[i]);
    }
    if (!finite)
      throw NumericError("non-finite gradient at layer " + std::to_string(layer));

    // Modulation adjoint: multiply by the conjugated mask factor.
    ComplexField pre_bar(n);
    const auto& fac = plan.mask_factors[layer - 1];
    for (std::size_t i = 0; i < pre_bar.a.size(); ++i)
      pre_bar.a[i] = std::conj(fac[i]) * cbar.a[i];

    // Propagation adjoint back to the layer's merged input.
    ComplexField merged_bar = plan_propagate(plan, pre_bar, 1, /*adjoint=*/true);

    std::uint32_t incoming = 0;
    for (const auto& s : plan.skips)
      if (s.to == layer) ++incoming;

    if (incoming == 0) {
      add_into(cot[layer - 1], merged_bar);
    } else {
      const double inv = 1.0 / static_cast<double>(1 + incoming);
      for (auto& v : merged_bar.a) v *= inv;
      add_into(cot[layer - 1], merged_bar);
      for (const auto& s : plan.skips)
        if (s.to == layer)
          add_into(cot[s.from], plan_propagate(plan, merged_bar, s.to - s.from, true));
    }
  }
  return res;
}

GradientResult backward(const NetworkConfig& config, const ComplexField& input,
                        std::uint32_t target, bool normalize_detector) {
  auto plan = make_plan(config);
  auto fwd = forward_with_plan(plan, input);
  return backward_with_plan(plan, config.detector, normalize_detector, fwd, target);
}

void step(TrainState& state, const std::vector<std::vector<double>>& grads) {
  if (grads.size() != state.masks.size())
    throw std::invalid_argument("gradient count does not match mask count");
  ++state.step_count;
  const auto& h = state.hyper;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < grads.size(); ++l) {
    if (grads[l].size() != state.masks[l].theta.size())
      throw std::invalid_argument("gradient shape does not match mask");
    auto& theta = state.masks[l].theta;
    auto& m = state.moments.m[l];
    auto& v = state.moments.v[l];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grads[l][i];
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
      theta[i] -= h.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + h.eps_adam);
    }
  }
}

namespace {

double plan_accuracy(const NetworkPlan& plan, const DetectorLayout& detector,
                     const FitDataset& data, const std::vector<std::uint32_t>& ids,
                     std::uint32_t threads) {
  if (ids.empty()) return 0.0;
  std::vector<std::uint8_t> hit(ids.size(), 0);
  parallel_for(ids.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const std::uint32_t node = ids[i];
      auto fwd = forward_with_plan(plan, data.encode(node));
      auto sums = detect(fwd.intensity_map, plan.grid.n, detector);
      std::uint32_t best = 0;
      for (std::uint32_t c = 1; c < sums.size(); ++c)
        if (sums[c] > sums[best]) best = c;
      hit[i] = best == data.labels[node] ? 1 : 0;
    }
  });
  std::size_t correct = 0;
  for (auto v : hit) correct += v;
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

}  // namespace

FitResult fit(const NetworkConfig& topology, TrainState state, const FitDataset& data,
              const FitOptions& opts) {
  if (data.train_ids.empty()) throw std::invalid_argument("training set is empty");
  NetworkConfig cfg = topology;
  cfg.masks = state.masks;
  auto plan = make_plan(cfg);

  const std::uint32_t threads = resolve_threads(opts.threads);
  const std::uint32_t batch = std::max<std::uint32_t>(1, state.hyper.batch_size);
  Rng batch_rng = Rng::stream(state.rng_seed, "batch");

  FitResult result;
  std::vector<std::uint32_t> order = data.train_ids;

  for (std::uint32_t epoch = 1; epoch <= state.hyper.epochs; ++epoch) {
    // Fisher-Yates on our own RNG: std::shuffle's draws differ across
    // standard libraries, which would break cross-platform determinism.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(batch_rng.next_below(i));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<GradientResult> slots;

    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const std::size_t bs = stop - start;
      slots.assign(bs, GradientResult{});
      parallel_for(bs, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const std::uint32_t node = order[start + i];
          auto fwd = forward_with_plan(plan, data.encode(node));
          slots[i] = backward_with_plan(plan, cfg.detector, opts.normalize_detector, fwd,
                                        data.labels[node]);
        }
      });

      // Reduce in sample order: byte-identical results per seed no matter
      // how the slots were computed.
      std::vector<std::vector<double>> mean = std::move(slots[0].grads);
      loss_sum += slots[0].report.loss;
      correct += slots[0].report.predicted == data.labels[order[start]] ? 1 : 0;
      for (std::size_t i = 1; i < bs; ++i) {
        for (std::size_t l = 0; l < mean.size(); ++l)
          for (std::size_t p = 0; p < mean[l].size(); ++p)
            mean[l][p] += slots[i].grads[l][p];
        loss_sum += slots[i].report.loss;
        correct += slots[i].report.predicted == data.labels[order[start + i]] ? 1 : 0;
      }
      const double inv = 1.0 / static_cast<double>(bs);
      for (auto& layer : mean)
        for (auto& g : layer) g *= inv;

      step(state, mean);
      plan.set_masks(state.masks);
    }

    state.epoch = epoch;
    EpochMetrics row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    row.test_acc = plan_accuracy(plan, cfg.detector, data, data.test_ids, threads);
    result.history.push_back(row);
    if (opts.on_epoch) opts.on_epoch(row);
  }

  result.state = std::move(state);
  return result;
}

double evaluate_accuracy(const NetworkConfig& config, const FitDataset& data,
                         const std::vector<std::uint32_t>& ids, std::uint32_t threads) {
  if (ids.empty()) throw std::invalid_argument("evaluation set is empty");
  auto plan = make_plan(config);
  return plan_accuracy(plan, config.detector, data, ids, resolve_threads(threads));
}

NetworkConfig grad_check_config(std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.grid = {16, 36e-6, 532e-9};
  cfg.layer_distance = 0.01;
  cfg.num_layers = 2;
  cfg.feature_layers = 2;
  cfg.skips = {{0, 2}};
  cfg.detector = DetectorLayout::uniform(16, 2, 4);
  cfg.masks.assign(2, PhaseMask(16));
  Rng rng = Rng::stream(seed, "gradcheck");
  for (auto& mask : cfg.masks)
    for (auto& t : mask.theta) t = 2.0 * std::numbers::pi * rng.next_unit();
  return cfg;
}

GradCheckReport grad_check(const NetworkConfig& config, const GradCheckOptions& opts) {
  const std::uint32_t n = config.grid.n;
  Rng rng = Rng::stream(opts.seed, "gradcheck");

  ComplexField input(n);
  for (auto& v : input.a) v = {2.0 * rng.next_unit() - 1.0, 2.0 * rng.next_unit() - 1.0};
  const double scale = 1.0 / std::sqrt(field_energy(input));
  for (auto& v : input.a) v *= scale;
  const std::uint32_t target =
      static_cast<std::uint32_t>(rng.next_below(config.detector.num_classes()));

  auto plan = make_plan(config);
  auto fwd = forward_with_plan(plan, input);
  auto analytic = backward_with_plan(plan, config.detector, false, fwd, target);

  const std::size_t per_layer = config.grid.pixels();
  const std::size_t total = config.num_layers * per_layer;
  const std::size_t want = std::min<std::size_t>(opts.num_params, total);

  std::vector<std::size_t> picks;
  {
    std::vector<std::uint8_t> taken(total, 0);
    while (picks.size() < want) {
      const std::size_t p = static_cast<std::size_t>(rng.next_below(total));
      if (!taken[p]) {
        taken[p] = 1;
        picks.push_back(p);
      }
    }
  }

  auto masks = config.masks;
  auto eval_loss = [&]() {
    plan.set_masks(masks);
    auto f = forward_with_plan(plan, input);
    auto sums = detect(f.intensity_map, n, config.detector);
    return loss(sums, target).loss;
  };

  std::vector<double> an(want), fd(want);
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t l = picks[i] / per_layer;
    const std::size_t px = picks[i] % per_layer;
    an[i] = analytic.grads[l][px];

    const double theta0 = masks[l].theta[px];
    masks[l].theta[px] = theta0 + opts.fd_step;
    const double lp = eval_loss();
    masks[l].theta[px] = theta0 - opts.fd_step;
    const double lm = eval_loss();
    masks[l].theta[px] = theta0;
    fd[i] = (lp - lm) / (2.0 * opts.fd_step);
  }

  double rms = 0.0;
  for (double a : an) rms += a * a;
  rms = std::sqrt(rms / static_cast<double>(want));

  GradCheckReport rep;
  rep.params_checked = static_cast<std::uint32_t>(want);
  rep.grad_rms = rms;
  rep.fd_step = opts.fd_step;
  rep.tolerance = opts.tolerance;

  std::vector<double> errs(want);
  for (std::size_t i = 0; i < want; ++i) {
    const double floor = std::max({std::abs(fd[i]), std::abs(an[i]), rms, 1e-10});
    errs[i] = std::abs(fd[i] - an[i]) / floor;
  }
  std::sort(errs.begin(), errs.end());
  rep.max_rel_err = errs.back();
  rep.median_rel_err = errs[want / 2];
  rep.passed = rep.max_rel_err <= opts.tolerance;
  return rep;
}

}  // namespace holograph
