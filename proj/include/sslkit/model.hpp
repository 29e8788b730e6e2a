#pragma once

#include "sslkit/common.hpp"
#include "sslkit/datagen.hpp"
#include "sslkit/metrics.hpp"
#include "sslkit/nn/layers.hpp"
#include "sslkit/nn/loss.hpp"
#include "sslkit/nn/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace ssl {

std::string loss_mode_name(nn::LossMode mode);
nn::LossMode loss_mode_from_name(const std::string& name);

struct NetworkConfig {
  int t = 12;
  int s = 22;
  std::array<int, 4> channels{64, 128, 256, 512};
  int hidden1 = 1024;
  int hidden2 = 512;
  nn::LossMode loss_mode = nn::LossMode::Custom;
  int batch_size = 128;
  int epochs = 100;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  int flat_features() const { return channels[3] * (t / 4) * (t / 4); }
  int output_features() const { return s * s; }
  void validate() const {
    if (t < 4 || t % 4 != 0) throw validation_error("t must be a positive multiple of 4");
    if (s < 1) throw validation_error("s must be >= 1");
    for (int c : channels)
      if (c < 1) throw validation_error("channel widths must be positive");
    if (hidden1 < 1 || hidden2 < 1) throw validation_error("hidden widths must be positive");
    if (batch_size < 1) throw validation_error("batch size must be >= 1");
    if (epochs < 0) throw validation_error("epochs must be >= 0");
    if (!(lr > 0)) throw validation_error("learning rate must be positive");
  }
};

// Heat-map regression CNN:
//   conv3x3(1->c0)+BN+PReLU, pool2, conv3x3(c0->c1)+BN+PReLU, pool2,
//   conv3x3(c1->c2)+BN+PReLU, conv3x3(c2->c3)+PReLU,
//   flatten, FC+PReLU, FC+PReLU, FC(linear) -> s*s
template <typename Scalar>
struct Network {
  NetworkConfig cfg;
  nn::Conv2d<Scalar> conv1, conv2, conv3, conv4;
  nn::BatchNorm2d<Scalar> bn1, bn2, bn3;
  nn::PReLU<Scalar> act1, act2, act3, act4, act5, act6;
  nn::MaxPool2x2<Scalar> pool1, pool2;
  nn::Linear<Scalar> fc1, fc2, fc3;

  explicit Network(const NetworkConfig& config) : cfg(config) {
    cfg.validate();
    const auto& ch = cfg.channels;
    conv1 = nn::Conv2d<Scalar>(1, ch[0]);
    conv2 = nn::Conv2d<Scalar>(ch[0], ch[1]);
    conv3 = nn::Conv2d<Scalar>(ch[1], ch[2]);
    conv4 = nn::Conv2d<Scalar>(ch[2], ch[3]);
    bn1 = nn::BatchNorm2d<Scalar>(ch[0]);
    bn2 = nn::BatchNorm2d<Scalar>(ch[1]);
    bn3 = nn::BatchNorm2d<Scalar>(ch[2]);
    act1 = nn::PReLU<Scalar>(ch[0]);
    act2 = nn::PReLU<Scalar>(ch[1]);
    act3 = nn::PReLU<Scalar>(ch[2]);
    act4 = nn::PReLU<Scalar>(ch[3]);
    fc1 = nn::Linear<Scalar>(cfg.flat_features(), cfg.hidden1);
    fc2 = nn::Linear<Scalar>(cfg.hidden1, cfg.hidden2);
    fc3 = nn::Linear<Scalar>(cfg.hidden2, cfg.output_features());
    act5 = nn::PReLU<Scalar>(cfg.hidden1);
    act6 = nn::PReLU<Scalar>(cfg.hidden2);
    init_params();
  }

  // Kaiming-style fan-in scaling for conv/FC weights, zero biases.
  void init_params() {
    std::mt19937_64 rng(derive_seed(cfg.seed, SeedStream::Init));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](nn::Tensor<Scalar>& w, double fan_in) {
      const double std_dev = std::sqrt(2.0 / fan_in);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data(i) = Scalar(std_dev * normal(rng));
    };
    fill(conv1.weight, conv1.in_ch * 9.0);
    fill(conv2.weight, conv2.in_ch * 9.0);
    fill(conv3.weight, conv3.in_ch * 9.0);
    fill(conv4.weight, conv4.in_ch * 9.0);
    fill(fc1.weight, fc1.in_features);
    fill(fc2.weight, fc2.in_features);
    fill(fc3.weight, fc3.in_features);
  }

  using TensorT = nn::Tensor<Scalar>;

  TensorT forward(const TensorT& x, nn::Mode mode) {
    if (x.shape.size() != 4 || x.dim(1) != 1 || x.dim(2) != cfg.t || x.dim(3) != cfg.t) {
      throw validation_error("network: expected input {B,1,t,t}");
    }
    TensorT h = conv1.forward(x);
    h = bn1.forward(h, mode);
    h = act1.forward(h);
    h = pool1.forward(h);
    h = conv2.forward(h);
    h = bn2.forward(h, mode);
    h = act2.forward(h);
    h = pool2.forward(h);
    h = conv3.forward(h);
    h = bn3.forward(h, mode);
    h = act3.forward(h);
    h = conv4.forward(h);
    h = act4.forward(h);
    h.reshape({h.dim(0), cfg.flat_features()});
    h = fc1.forward(h);
    h = act5.forward(h);
    h = fc2.forward(h);
    h = act6.forward(h);
    h = fc3.forward(h);
    return h;  // {B, s*s}, linear output
  }

  void backward(const TensorT& dpred) {
    TensorT d = fc3.backward(dpred);
    d = act6.backward(d);
    d = fc2.backward(d);
    d = act5.backward(d);
    d = fc1.backward(d);
    const int q = cfg.t / 4;
    d.reshape({d.dim(0), cfg.channels[3], q, q});
    d = act4.backward(d);
    d = conv4.backward(d);
    d = act3.backward(d);
    d = bn3.backward(d);
    d = conv3.backward(d);
    d = pool2.backward(d);
    d = act2.backward(d);
    d = bn2.backward(d);
    d = conv2.backward(d);
    d = pool1.backward(d);
    d = act1.backward(d);
    d = bn1.backward(d);
    conv1.backward(d);
  }

  std::vector<nn::ParamRef<Scalar>> params() {
    std::vector<nn::ParamRef<Scalar>> out;
    conv1.register_params(out, "conv1");
    bn1.register_params(out, "bn1");
    act1.register_params(out, "act1");
    conv2.register_params(out, "conv2");
    bn2.register_params(out, "bn2");
    act2.register_params(out, "act2");
    conv3.register_params(out, "conv3");
    bn3.register_params(out, "bn3");
    act3.register_params(out, "act3");
    conv4.register_params(out, "conv4");
    act4.register_params(out, "act4");
    fc1.register_params(out, "fc1");
    act5.register_params(out, "act5");
    fc2.register_params(out, "fc2");
    act6.register_params(out, "act6");
    fc3.register_params(out, "fc3");
    return out;
  }

  // Non-trainable state that inference still depends on.
  std::vector<std::pair<std::string, VecX<Scalar>*>> buffers() {
    return {{"bn1.running_mean", &bn1.running_mean}, {"bn1.running_var", &bn1.running_var},
            {"bn2.running_mean", &bn2.running_mean}, {"bn2.running_var", &bn2.running_var},
            {"bn3.running_mean", &bn3.running_mean}, {"bn3.running_var", &bn3.running_var}};
  }

  void zero_grad() {
    for (auto& p : params()) p.tensor->zero_grad();
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;
};

struct TrainOptions {
  std::string log_csv;        // per-epoch CSV log path ("" = no file)
  double val_fraction = 0.05; // used when no explicit validation dataset is given
  double stop_loss = -1;      // early stop once train_loss < stop_loss ...
  double stop_accuracy = -1;  // ... and val_accuracy >= stop_accuracy (both enabled)
  int eval_batch = 256;
  bool verbose = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double best_val_accuracy = 0;
};

struct EvalSummary {
  double mean_loss = 0;
  double mean_accuracy = 0;
};

// ---- implementation helpers ----

template <typename Scalar>
nn::Tensor<Scalar> make_input_batch(const Dataset& ds, const std::vector<std::int64_t>& idx,
                                    std::size_t from, int count) {
  nn::Tensor<Scalar> x({count, 1, ds.t, ds.t});
  for (int b = 0; b < count; ++b) {
    const auto col = idx[from + static_cast<std::size_t>(b)];
    x.data.segment(static_cast<Eigen::Index>(b) * ds.t * ds.t, ds.t * ds.t) =
        ds.inputs.col(col).cast<Scalar>();
  }
  return x;
}

// Mean loss/accuracy over the given sample indices, eval-mode forward.
template <typename Scalar>
EvalSummary evaluate(Network<Scalar>& net, const Dataset& ds,
                     const std::vector<std::int64_t>& idx, int batch = 256,
                     const PeakExtractionConfig& peaks = {}) {
  const int K = net.cfg.output_features();
  EvalSummary sum;
  if (idx.empty()) return sum;
  for (std::size_t at = 0; at < idx.size(); at += static_cast<std::size_t>(batch)) {
    const int B = static_cast<int>(std::min<std::size_t>(batch, idx.size() - at));
    auto x = make_input_batch<Scalar>(ds, idx, at, B);
    auto pred = net.forward(x, nn::Mode::Eval);
    for (int b = 0; b < B; ++b) {
      const auto col = idx[at + static_cast<std::size_t>(b)];
      VecX<Scalar> label = ds.labels.col(col).cast<Scalar>();
      const Scalar l =
          nn::custom_loss<Scalar>(pred.data.segment(static_cast<Eigen::Index>(b) * K, K), label,
                                  net.cfg.s, ds.source_cells[static_cast<std::size_t>(col)],
                                  net.cfg.loss_mode, nullptr);
      sum.mean_loss += static_cast<double>(l);
      Mat pred_map(net.cfg.s, net.cfg.s);
      Mat label_map(net.cfg.s, net.cfg.s);
      for (int r = 0; r < net.cfg.s; ++r) {
        for (int c = 0; c < net.cfg.s; ++c) {
          pred_map(r, c) = static_cast<double>(
              pred.data(static_cast<Eigen::Index>(b) * K + static_cast<Eigen::Index>(r) * net.cfg.s + c));
          label_map(r, c) =
              static_cast<double>(ds.labels(static_cast<Eigen::Index>(r) * net.cfg.s + c, col));
        }
      }
      sum.mean_accuracy += get_accuracy(label_map, pred_map, peaks);
    }
  }
  sum.mean_loss /= static_cast<double>(idx.size());
  sum.mean_accuracy /= static_cast<double>(idx.size());
  return sum;
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

// Mini-batch Adam training with seeded shuffling and best-validation
// parameter selection. Deterministic given the seed at workers() == 1.
template <typename Scalar>
TrainResult train(Network<Scalar>& net, const Dataset& train_ds, const Dataset* val_ds,
                  const TrainOptions& opts = {}) {
  if (train_ds.t != net.cfg.t || train_ds.s != net.cfg.s) {
    throw config_mismatch_error("train: dataset geometry does not match network config");
  }
  if (val_ds && (val_ds->t != net.cfg.t || val_ds->s != net.cfg.s)) {
    throw config_mismatch_error("train: validation dataset geometry mismatch");
  }
  const int K = net.cfg.output_features();
  const std::uint64_t seed = net.cfg.seed;

  std::vector<std::int64_t> train_idx, val_idx;
  const Dataset* val_src = val_ds;
  if (val_ds) {
    train_idx.resize(static_cast<std::size_t>(train_ds.size()));
    std::iota(train_idx.begin(), train_idx.end(), 0);
    val_idx.resize(static_cast<std::size_t>(val_ds->size()));
    std::iota(val_idx.begin(), val_idx.end(), 0);
  } else {
    // Deterministic 95/5 style split of the training dataset.
    std::vector<std::int64_t> all(static_cast<std::size_t>(train_ds.size()));
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, SeedStream::Shuffle, 0xF00D));
    std::shuffle(all.begin(), all.end(), rng);
    auto n_val = static_cast<std::size_t>(std::llround(opts.val_fraction * all.size()));
    n_val = std::min(n_val, all.size() > 1 ? all.size() - 1 : std::size_t{0});
    val_idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(all.begin() + static_cast<std::ptrdiff_t>(n_val), all.end());
    val_src = &train_ds;
  }

  auto params = net.params();
  nn::Adam<Scalar> adam(net.cfg.lr);
  adam.init(params);

  TrainResult result;
  std::vector<VecX<Scalar>> best_params;
  std::vector<VecX<Scalar>> best_buffers;
  auto snapshot = [&]() {
    best_params.clear();
    for (auto& p : params) best_params.push_back(p.tensor->data);
    best_buffers.clear();
    for (auto& [name, buf] : net.buffers()) best_buffers.push_back(*buf);
  };
  auto restore = [&]() {
    if (best_params.empty()) return;
    for (std::size_t i = 0; i < params.size(); ++i) params[i].tensor->data = best_params[i];
    auto bufs = net.buffers();
    for (std::size_t i = 0; i < bufs.size(); ++i) *bufs[i].second = best_buffers[i];
  };

  nn::Tensor<Scalar> dpred;
  VecX<Scalar> sample_grad;
  for (int epoch = 0; epoch < net.cfg.epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(seed, SeedStream::Shuffle, static_cast<std::uint64_t>(epoch)));
    std::shuffle(train_idx.begin(), train_idx.end(), rng);

    double epoch_loss = 0;
    std::int64_t seen = 0;
    for (std::size_t at = 0; at < train_idx.size(); at += static_cast<std::size_t>(net.cfg.batch_size)) {
      const int B = static_cast<int>(
          std::min<std::size_t>(static_cast<std::size_t>(net.cfg.batch_size), train_idx.size() - at));
      if (B < 2) break;  // batchnorm train mode needs at least two samples
      auto x = make_input_batch<Scalar>(train_ds, train_idx, at, B);
      net.zero_grad();
      auto pred = net.forward(x, nn::Mode::Train);

      dpred = nn::Tensor<Scalar>({B, K});
      double batch_loss = 0;
      for (int b = 0; b < B; ++b) {
        const auto col = train_idx[at + static_cast<std::size_t>(b)];
        VecX<Scalar> label = train_ds.labels.col(col).cast<Scalar>();
        sample_grad = VecX<Scalar>::Zero(K);
        const Scalar l = nn::custom_loss<Scalar>(
            pred.data.segment(static_cast<Eigen::Index>(b) * K, K), label, net.cfg.s,
            train_ds.source_cells[static_cast<std::size_t>(col)], net.cfg.loss_mode, &sample_grad);
        batch_loss += static_cast<double>(l);
        dpred.data.segment(static_cast<Eigen::Index>(b) * K, K) = sample_grad / Scalar(B);
      }
      batch_loss /= B;
      if (!std::isfinite(batch_loss)) {
        throw numeric_error("training aborted: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch offset " + std::to_string(at));
      }
      net.backward(dpred);
      adam.step(params);
      epoch_loss += batch_loss * B;
      seen += B;
    }
    epoch_loss /= static_cast<double>(std::max<std::int64_t>(seen, 1));

    EvalSummary val = evaluate(net, *val_src, val_idx, opts.eval_batch);
    EpochRecord rec{epoch, epoch_loss, val.mean_loss, val.mean_accuracy};
    result.history.push_back(rec);
    if (opts.verbose) {
      std::printf("epoch %4d  train %.6f  val %.6f  acc %.4f\n", epoch, rec.train_loss,
                  rec.val_loss, rec.val_accuracy);
      std::fflush(stdout);
    }

    const bool better = val_idx.empty()
                            ? true
                            : (rec.val_accuracy > result.best_val_accuracy ||
                               (rec.val_accuracy == result.best_val_accuracy &&
                                rec.val_loss < result.best_val_loss));
    if (better || result.best_epoch < 0) {
      result.best_epoch = epoch;
      result.best_val_accuracy = rec.val_accuracy;
      result.best_val_loss = rec.val_loss;
      snapshot();
    }
    if (opts.stop_loss > 0 && opts.stop_accuracy >= 0 && rec.train_loss < opts.stop_loss &&
        rec.val_accuracy >= opts.stop_accuracy) {
      break;
    }
  }
  restore();
  if (!opts.log_csv.empty()) write_history_csv(opts.log_csv, result.history);
  return result;
}

// ---- checkpoint persistence ----

struct TensorBlob {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
};

struct Checkpoint {
  NetworkConfig config;
  std::vector<TensorBlob> params;
  std::vector<TensorBlob> buffers;
  struct AdamState {
    bool present = false;
    long step_count = 0;
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<std::vector<float>> m, v;
  } adam;
  std::vector<EpochRecord> history;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

template <typename Scalar>
Checkpoint make_checkpoint(Network<Scalar>& net, const nn::Adam<Scalar>* adam,
                           const std::vector<EpochRecord>& history) {
  Checkpoint ckpt;
  ckpt.config = net.cfg;
  for (auto& p : net.params()) {
    TensorBlob blob;
    blob.name = p.name;
    blob.shape = p.tensor->shape;
    blob.values.resize(static_cast<std::size_t>(p.tensor->size()));
    for (Eigen::Index i = 0; i < p.tensor->size(); ++i)
      blob.values[static_cast<std::size_t>(i)] = static_cast<float>(p.tensor->data(i));
    ckpt.params.push_back(std::move(blob));
  }
  for (auto& [name, buf] : net.buffers()) {
    TensorBlob blob;
    blob.name = name;
    blob.shape = {static_cast<int>(buf->size())};
    blob.values.resize(static_cast<std::size_t>(buf->size()));
    for (Eigen::Index i = 0; i < buf->size(); ++i)
      blob.values[static_cast<std::size_t>(i)] = static_cast<float>((*buf)(i));
    ckpt.buffers.push_back(std::move(blob));
  }
  if (adam) {
    ckpt.adam.present = true;
    ckpt.adam.step_count = adam->step_count;
    ckpt.adam.lr = adam->lr;
    ckpt.adam.beta1 = adam->beta1;
    ckpt.adam.beta2 = adam->beta2;
    ckpt.adam.eps = adam->eps;
    for (const auto& mv : adam->m) {
      std::vector<float> vals(static_cast<std::size_t>(mv.size()));
      for (Eigen::Index i = 0; i < mv.size(); ++i) vals[static_cast<std::size_t>(i)] = float(mv(i));
      ckpt.adam.m.push_back(std::move(vals));
    }
    for (const auto& vv : adam->v) {
      std::vector<float> vals(static_cast<std::size_t>(vv.size()));
      for (Eigen::Index i = 0; i < vv.size(); ++i) vals[static_cast<std::size_t>(i)] = float(vv(i));
      ckpt.adam.v.push_back(std::move(vals));
    }
  }
  ckpt.history = history;
  return ckpt;
}

template <typename Scalar>
void restore_network(Network<Scalar>& net, const Checkpoint& ckpt) {
  auto params = net.params();
  if (params.size() != ckpt.params.size()) {
    throw config_mismatch_error("checkpoint parameter list does not match network");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != ckpt.params[i].name ||
        params[i].tensor->shape != ckpt.params[i].shape) {
      throw config_mismatch_error("checkpoint tensor mismatch at " + ckpt.params[i].name);
    }
    for (Eigen::Index k = 0; k < params[i].tensor->size(); ++k) {
      params[i].tensor->data(k) = Scalar(ckpt.params[i].values[static_cast<std::size_t>(k)]);
    }
  }
  auto bufs = net.buffers();
  if (bufs.size() != ckpt.buffers.size()) {
    throw config_mismatch_error("checkpoint buffer list does not match network");
  }
  for (std::size_t i = 0; i < bufs.size(); ++i) {
    if (bufs[i].first != ckpt.buffers[i].name ||
        bufs[i].second->size() != static_cast<Eigen::Index>(ckpt.buffers[i].values.size())) {
      throw config_mismatch_error("checkpoint buffer mismatch at " + ckpt.buffers[i].name);
    }
    for (Eigen::Index k = 0; k < bufs[i].second->size(); ++k) {
      (*bufs[i].second)(k) = Scalar(ckpt.buffers[i].values[static_cast<std::size_t>(k)]);
    }
  }
}

// Convenience: build the network a checkpoint describes and load its state.
template <typename Scalar>
Network<Scalar> network_from_checkpoint(const Checkpoint& ckpt) {
  Network<Scalar> net(ckpt.config);
  restore_network(net, ckpt);
  return net;
}

}  // namespace ssl
