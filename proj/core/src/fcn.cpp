#include "soz/fcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "soz/error.hpp"
#include "soz/forest.hpp"
#include "soz/parallel.hpp"

namespace soz {

namespace {

// Samples per reduction chunk. Gradients and batch statistics are summed
// within a chunk in sample order, then across chunks in chunk order, so the
// result does not depend on the worker count.
constexpr std::size_t kChunk = 8;

template <class Body>
void for_chunks(std::size_t batch, Body&& body) {
  const std::size_t chunks = (batch + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    body(c, c * kChunk, std::min(batch, (c + 1) * kChunk));
  });
}

void conv_forward(const double* in, std::size_t cin, const double* w, std::size_t cout,
                  std::size_t k, std::size_t len, double* out) {
  const auto pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
  const auto n = static_cast<std::ptrdiff_t>(len);
  for (std::size_t co = 0; co < cout; ++co) {
    double* o = out + co * len;
    std::fill(o, o + len, 0.0);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* ip = in + ci * len;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double wv = w[(co * cin + ci) * k + kk];
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(kk) - pad;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -s);
        const std::ptrdiff_t hi = std::min(n, n - s);
        for (std::ptrdiff_t t = lo; t < hi; ++t) o[t] += wv * ip[t + s];
      }
    }
  }
}

void conv_backward(const double* in, std::size_t cin, const double* w, std::size_t cout,
                   std::size_t k, std::size_t len, const double* dout, double* dw, double* din) {
  const auto pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
  const auto n = static_cast<std::ptrdiff_t>(len);
  for (std::size_t co = 0; co < cout; ++co) {
    const double* d = dout + co * len;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* ip = in + ci * len;
      double* dp = din != nullptr ? din + ci * len : nullptr;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t wi = (co * cin + ci) * k + kk;
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(kk) - pad;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -s);
        const std::ptrdiff_t hi = std::min(n, n - s);
        double acc = 0.0;
        for (std::ptrdiff_t t = lo; t < hi; ++t) acc += d[t] * ip[t + s];
        dw[wi] += acc;
        if (dp != nullptr) {
          const double wv = w[wi];
          for (std::ptrdiff_t t = lo; t < hi; ++t) dp[t + s] += wv * d[t];
        }
      }
    }
  }
}

// Activations of one batch.
struct Pass {
  std::size_t batch = 0;
  std::size_t len = 0;
  std::span<const double> x0;
  std::vector<std::vector<double>> xhat;  // per block, batch x C x L
  std::vector<std::vector<double>> act;   // ReLU outputs
  std::vector<std::vector<double>> mean;  // per block, per channel
  std::vector<std::vector<double>> var;
  std::vector<double> pooled;  // batch x C
  std::vector<double> probs;   // batch x 2
};

void forward(const FcnNet& net, Pass& p, bool batch_stats) {
  const auto& params = net.params();
  const std::size_t b = p.batch;
  const std::size_t len = p.len;
  const std::size_t nb = net.blocks().size();
  p.xhat.assign(nb, {});
  p.act.assign(nb, {});
  p.mean.assign(nb, {});
  p.var.assign(nb, {});
  for (std::size_t l = 0; l < nb; ++l) {
    const FcnBlock& blk = net.blocks()[l];
    const std::size_t c = blk.out_channels;
    const double* in = l == 0 ? p.x0.data() : p.act[l - 1].data();
    const std::size_t in_stride = blk.in_channels * len;
    std::vector<double>& z = p.xhat[l];
    z.resize(b * c * len);
    for_chunks(b, [&](std::size_t, std::size_t s0, std::size_t s1) {
      for (std::size_t s = s0; s < s1; ++s) {
        conv_forward(in + s * in_stride, blk.in_channels, params.data() + blk.weight, c,
                     blk.kernel, len, z.data() + s * c * len);
      }
    });

    std::vector<double>& mu = p.mean[l];
    std::vector<double>& var = p.var[l];
    if (batch_stats) {
      const double count = static_cast<double>(b * len);
      std::vector<double> part(b * c);
      parallel_for(b, [&](std::size_t s) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* zp = z.data() + (s * c + ch) * len;
          part[s * c + ch] = std::accumulate(zp, zp + len, 0.0);
        }
      });
      mu.assign(c, 0.0);
      for (std::size_t s = 0; s < b; ++s) {
        for (std::size_t ch = 0; ch < c; ++ch) mu[ch] += part[s * c + ch];
      }
      for (auto& m : mu) m /= count;
      parallel_for(b, [&](std::size_t s) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* zp = z.data() + (s * c + ch) * len;
          double acc = 0.0;
          for (std::size_t t = 0; t < len; ++t) acc += (zp[t] - mu[ch]) * (zp[t] - mu[ch]);
          part[s * c + ch] = acc;
        }
      });
      var.assign(c, 0.0);
      for (std::size_t s = 0; s < b; ++s) {
        for (std::size_t ch = 0; ch < c; ++ch) var[ch] += part[s * c + ch];
      }
      for (auto& v : var) v /= count;
    } else {
      mu = net.running_mean(l);
      var = net.running_var(l);
    }

    std::vector<double>& a = p.act[l];
    a.resize(b * c * len);
    const double* gamma = params.data() + blk.gamma;
    const double* beta = params.data() + blk.beta;
    parallel_for(b, [&](std::size_t s) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double inv = 1.0 / std::sqrt(var[ch] + kBatchNormEps);
        double* zp = z.data() + (s * c + ch) * len;
        double* ap = a.data() + (s * c + ch) * len;
        for (std::size_t t = 0; t < len; ++t) {
          zp[t] = (zp[t] - mu[ch]) * inv;
          ap[t] = std::max(0.0, gamma[ch] * zp[t] + beta[ch]);
        }
      }
    });
  }

  const std::size_t c = net.filters();
  const std::vector<double>& last = p.act.back();
  p.pooled.assign(b * c, 0.0);
  p.probs.assign(b * 2, 0.0);
  const double* hw = params.data() + net.head_weight();
  const double* hb = params.data() + net.head_bias();
  parallel_for(b, [&](std::size_t s) {
    double* g = p.pooled.data() + s * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* ap = last.data() + (s * c + ch) * len;
      g[ch] = std::accumulate(ap, ap + len, 0.0) / static_cast<double>(len);
    }
    double logit[2];
    for (std::size_t k = 0; k < 2; ++k) {
      logit[k] = hb[k];
      for (std::size_t ch = 0; ch < c; ++ch) logit[k] += hw[k * c + ch] * g[ch];
    }
    const double mx = std::max(logit[0], logit[1]);
    const double e0 = std::exp(logit[0] - mx);
    const double e1 = std::exp(logit[1] - mx);
    p.probs[2 * s] = e0 / (e0 + e1);
    p.probs[2 * s + 1] = e1 / (e0 + e1);
  });
}

double batch_loss(const Pass& p, std::span<const int> labels) {
  double sum = 0.0;
  for (std::size_t s = 0; s < p.batch; ++s) {
    const double pr = p.probs[2 * s + (labels[s] ? 1 : 0)];
    sum += -std::log(std::max(pr, 1e-300));
  }
  return sum / static_cast<double>(p.batch);
}

void backward(const FcnNet& net, Pass& p, std::span<const int> labels, std::vector<double>& grad) {
  const auto& params = net.params();
  const std::size_t b = p.batch;
  const std::size_t len = p.len;
  const std::size_t c = net.filters();
  const std::size_t nb = net.blocks().size();
  const std::size_t chunks = (b + kChunk - 1) / kChunk;
  grad.assign(params.size(), 0.0);

  // Head and pooling.
  std::vector<double> dlogit(2 * b);
  for (std::size_t s = 0; s < b; ++s) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double target = (labels[s] ? 1u : 0u) == k ? 1.0 : 0.0;
      dlogit[2 * s + k] = (p.probs[2 * s + k] - target) / static_cast<double>(b);
    }
  }
  const double* hw = params.data() + net.head_weight();
  for (std::size_t s = 0; s < b; ++s) {
    for (std::size_t k = 0; k < 2; ++k) {
      grad[net.head_bias() + k] += dlogit[2 * s + k];
      for (std::size_t ch = 0; ch < c; ++ch) {
        grad[net.head_weight() + k * c + ch] += dlogit[2 * s + k] * p.pooled[s * c + ch];
      }
    }
  }
  std::vector<double> dact(b * c * len);
  parallel_for(b, [&](std::size_t s) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double dg = (hw[ch] * dlogit[2 * s] + hw[c + ch] * dlogit[2 * s + 1]) /
                        static_cast<double>(len);
      std::fill_n(dact.data() + (s * c + ch) * len, len, dg);
    }
  });

  for (std::size_t l = nb; l-- > 0;) {
    const FcnBlock& blk = net.blocks()[l];
    const std::size_t co = blk.out_channels;
    const double* gamma = params.data() + blk.gamma;
    const std::vector<double>& xh = p.xhat[l];
    const std::vector<double>& a = p.act[l];

    // ReLU, then batch-norm sums per channel.
    std::vector<double> sums(2 * b * co);
    parallel_for(b, [&](std::size_t s) {
      for (std::size_t ch = 0; ch < co; ++ch) {
        const std::size_t off = (s * co + ch) * len;
        double sd = 0.0;
        double sdx = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
          const double dy = a[off + t] > 0.0 ? dact[off + t] : 0.0;
          dact[off + t] = dy;
          sd += dy;
          sdx += dy * xh[off + t];
        }
        sums[2 * (s * co + ch)] = sd;
        sums[2 * (s * co + ch) + 1] = sdx;
      }
    });
    std::vector<double> sum_dy(co, 0.0);
    std::vector<double> sum_dyx(co, 0.0);
    for (std::size_t s = 0; s < b; ++s) {
      for (std::size_t ch = 0; ch < co; ++ch) {
        sum_dy[ch] += sums[2 * (s * co + ch)];
        sum_dyx[ch] += sums[2 * (s * co + ch) + 1];
      }
    }
    for (std::size_t ch = 0; ch < co; ++ch) {
      grad[blk.beta + ch] += sum_dy[ch];
      grad[blk.gamma + ch] += sum_dyx[ch];
    }
    const double count = static_cast<double>(b * len);
    parallel_for(b, [&](std::size_t s) {
      for (std::size_t ch = 0; ch < co; ++ch) {
        const double inv = 1.0 / std::sqrt(p.var[l][ch] + kBatchNormEps);
        const double scale = gamma[ch] * inv / count;
        const std::size_t off = (s * co + ch) * len;
        for (std::size_t t = 0; t < len; ++t) {
          dact[off + t] =
              scale * (count * dact[off + t] - sum_dy[ch] - xh[off + t] * sum_dyx[ch]);
        }
      }
    });

    // Convolution: dact now holds d(conv output).
    const double* in = l == 0 ? p.x0.data() : p.act[l - 1].data();
    const std::size_t ci = blk.in_channels;
    const std::size_t wsize = co * ci * blk.kernel;
    std::vector<double> din(l == 0 ? 0 : b * ci * len, 0.0);
    std::vector<double> dw(chunks * wsize, 0.0);
    for_chunks(b, [&](std::size_t chunk, std::size_t s0, std::size_t s1) {
      for (std::size_t s = s0; s < s1; ++s) {
        conv_backward(in + s * ci * len, ci, params.data() + blk.weight, co, blk.kernel, len,
                      dact.data() + s * co * len, dw.data() + chunk * wsize,
                      l == 0 ? nullptr : din.data() + s * ci * len);
      }
    });
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
      for (std::size_t i = 0; i < wsize; ++i) grad[blk.weight + i] += dw[chunk * wsize + i];
    }
    dact = std::move(din);
  }
}

}  // namespace

FcnNet::FcnNet(std::size_t input_length, std::size_t filters, Rng& rng,
               std::array<std::size_t, 3> kernels)
    : length_(input_length), filters_(filters) {
  if (input_length == 0 || filters == 0) {
    throw Error(Errc::ShapeMismatch, "network needs a positive input length and filter count");
  }
  std::size_t off = 0;
  std::size_t in = 1;
  for (std::size_t k : kernels) {
    if (k == 0 || k % 2 == 0) throw Error(Errc::InvalidConfig, "kernel sizes must be odd");
    FcnBlock blk;
    blk.in_channels = in;
    blk.out_channels = filters;
    blk.kernel = k;
    blk.weight = off;
    off += filters * in * k;
    blk.gamma = off;
    off += filters;
    blk.beta = off;
    off += filters;
    blocks_.push_back(blk);
    in = filters;
  }
  head_w_ = off;
  off += 2 * filters;
  head_b_ = off;
  off += 2;
  params_.assign(off, 0.0);
  for (const FcnBlock& blk : blocks_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(blk.in_channels * blk.kernel));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < blk.out_channels * blk.in_channels * blk.kernel; ++i) {
      params_[blk.weight + i] = u(rng);
    }
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(blk.gamma), filters, 1.0);
  }
  const double hb = 1.0 / std::sqrt(static_cast<double>(filters));
  std::uniform_real_distribution<double> u(-hb, hb);
  for (std::size_t i = 0; i < 2 * filters; ++i) params_[head_w_ + i] = u(rng);
  run_mean_.assign(blocks_.size(), std::vector<double>(filters, 0.0));
  run_var_.assign(blocks_.size(), std::vector<double>(filters, 1.0));
}

std::vector<double> global_average_pool(std::span<const double> map, std::size_t channels,
                                        std::size_t length) {
  if (map.size() != channels * length || length == 0) {
    throw Error(Errc::ShapeMismatch, "feature map size does not match channels x length");
  }
  std::vector<double> out(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* p = map.data() + c * length;
    out[c] = std::accumulate(p, p + length, 0.0) / static_cast<double>(length);
  }
  return out;
}

std::vector<double> fcn_forward(const FcnNet& net, std::span<const double> inputs,
                                std::size_t batch, bool batch_stats, FcnShapes* shapes) {
  if (batch == 0 || inputs.size() != batch * net.input_length()) {
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(batch) + " inputs of length " +
                                         std::to_string(net.input_length()));
  }
  Pass p;
  p.batch = batch;
  p.len = net.input_length();
  p.x0 = inputs;
  forward(net, p, batch_stats);
  if (shapes != nullptr) {
    shapes->block_outputs.clear();
    for (std::size_t l = 0; l < p.act.size(); ++l) {
      shapes->block_outputs.emplace_back(net.blocks()[l].out_channels, p.act[l].size() /
                                                                           (batch * net.blocks()[l].out_channels));
    }
    shapes->pooled = p.pooled.size() / batch;
  }
  return p.probs;
}

double fcn_loss(const FcnNet& net, std::span<const double> inputs, std::span<const int> labels,
                std::vector<double>* grad) {
  const std::size_t batch = labels.size();
  if (batch == 0 || inputs.size() != batch * net.input_length()) {
    throw Error(Errc::ShapeMismatch, "inputs do not match labels x input length");
  }
  Pass p;
  p.batch = batch;
  p.len = net.input_length();
  p.x0 = inputs;
  forward(net, p, true);
  const double loss = batch_loss(p, labels);
  if (grad != nullptr) backward(net, p, labels, *grad);
  return loss;
}

std::vector<double> FcnModel::prepare(std::span<const double> row) const {
  const std::size_t len = net_.input_length();
  std::vector<double> out(len);
  for (std::size_t t = 0; t < series_cols_; ++t) out[t] = (row[t] - series_mean_) * series_scale_;
  for (std::size_t j = 0; j < meta_mean_.size(); ++j) {
    out[series_cols_ + j] = (row[series_cols_ + j] - meta_mean_[j]) * meta_scale_[j];
  }
  return out;
}

ProbaMatrix FcnModel::predict_proba(const FeatureMatrix& x) const {
  if (x.cols() != cols_) throw Error(Errc::ColumnMismatch, "feature count differs from training");
  const std::size_t len = net_.input_length();
  ProbaMatrix out(x.rows());
  constexpr std::size_t kBlock = 64;
  std::vector<double> inputs;
  for (std::size_t r0 = 0; r0 < x.rows(); r0 += kBlock) {
    const std::size_t r1 = std::min(x.rows(), r0 + kBlock);
    inputs.assign((r1 - r0) * len, 0.0);
    for (std::size_t r = r0; r < r1; ++r) {
      const auto v = prepare(x.row(r));
      std::copy(v.begin(), v.end(), inputs.begin() + static_cast<std::ptrdiff_t>((r - r0) * len));
    }
    const auto probs = fcn_forward(net_, inputs, r1 - r0, false);
    for (std::size_t r = r0; r < r1; ++r) out.set_positive(r, probs[2 * (r - r0) + 1]);
  }
  return out;
}

FcnModel fcn_train(const FeatureMatrix& train, const FcnConfig& cfg) {
  if (train.rows() == 0) throw Error(Errc::EmptyInput, "no training rows");
  if (cfg.batch_size == 0) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
  if (!(cfg.lr > 0.0)) throw Error(Errc::InvalidConfig, "lr must be > 0");
  require_both_classes(train.labels());
  const std::size_t series = train.series_columns();
  if (series == 0) throw Error(Errc::ShapeMismatch, "training matrix has no series columns");
  const std::size_t meta = cfg.variant == FcnVariant::tsm ? train.cols() - series : 0;
  if (cfg.variant == FcnVariant::tsm && meta == 0) {
    throw Error(Errc::ShapeMismatch, "TSM variant needs metadata columns");
  }

  std::vector<std::size_t> rows(train.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (cfg.train_subsample > 0 && cfg.train_subsample < rows.size()) {
    Rng rng = make_rng(cfg.seed, {0xfc5ULL});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(cfg.train_subsample);
    std::sort(rows.begin(), rows.end());
  }
  const std::size_t n = rows.size();
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = train.labels()[rows[i]];
  require_both_classes(labels);

  FcnModel model;
  model.variant_ = cfg.variant;
  model.cols_ = train.cols();
  model.series_cols_ = series;
  {
    double sum = 0.0;
    for (auto r : rows) {
      for (std::size_t t = 0; t < series; ++t) sum += train.at(r, t);
    }
    const double count = static_cast<double>(n * series);
    model.series_mean_ = sum / count;
    double ss = 0.0;
    for (auto r : rows) {
      for (std::size_t t = 0; t < series; ++t) {
        const double dv = train.at(r, t) - model.series_mean_;
        ss += dv * dv;
      }
    }
    const double sd = std::sqrt(ss / count);
    model.series_scale_ = sd > 0.0 ? 1.0 / sd : 1.0;
    const double gain =
        cfg.meta_gain > 0.0 ? cfg.meta_gain : std::sqrt(static_cast<double>(series));
    for (std::size_t j = 0; j < meta; ++j) {
      double s = 0.0;
      for (auto r : rows) s += train.at(r, series + j);
      const double mu = s / static_cast<double>(n);
      double v = 0.0;
      for (auto r : rows) v += (train.at(r, series + j) - mu) * (train.at(r, series + j) - mu);
      const double msd = std::sqrt(v / static_cast<double>(n));
      model.meta_mean_.push_back(mu);
      model.meta_scale_.push_back(gain * (msd > 0.0 ? 1.0 / msd : 1.0));
    }
  }

  const std::size_t len = series + meta;
  Rng init = make_rng(cfg.seed, {0xfc11ULL});
  model.net_ = FcnNet(len, cfg.filters, init);
  FcnNet& net = model.net_;

  std::vector<double> x(n * len);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = model.prepare(train.row(rows[i]));
    std::copy(v.begin(), v.end(), x.begin() + static_cast<std::ptrdiff_t>(i * len));
  }

  const std::size_t bs = std::min(cfg.batch_size, n);
  std::vector<double> batch_x;
  std::vector<int> batch_y;
  auto load = [&](const std::vector<std::size_t>& order, std::size_t b0, std::size_t b1) {
    batch_x.resize((b1 - b0) * len);
    batch_y.resize(b1 - b0);
    for (std::size_t k = b0; k < b1; ++k) {
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(order[k] * len), len,
                  batch_x.begin() + static_cast<std::ptrdiff_t>((k - b0) * len));
      batch_y[k - b0] = labels[order[k]];
    }
  };
  auto check = [](double loss, std::size_t epoch) {
    if (!std::isfinite(loss)) {
      throw Error(Errc::DivergedLoss, "non-finite training loss in epoch " + std::to_string(epoch));
    }
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  {
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += bs) {
      load(order, b0, std::min(n, b0 + bs));
      total += fcn_loss(net, batch_x, batch_y);
      ++batches;
    }
    model.loss_.push_back(total / static_cast<double>(batches));
    check(model.loss_.back(), 0);
  }

  // Adam.
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<double>& theta = net.params();
  std::vector<double> m1(theta.size(), 0.0);
  std::vector<double> m2(theta.size(), 0.0);
  std::vector<double> grad;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng = make_rng(cfg.seed, {0xfc4ULL, epoch});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += bs) {
      const std::size_t b1 = std::min(n, b0 + bs);
      load(order, b0, b1);
      Pass p;
      p.batch = b1 - b0;
      p.len = len;
      p.x0 = batch_x;
      forward(net, p, true);
      const double loss = batch_loss(p, batch_y);
      check(loss, epoch);
      total += loss;
      ++batches;
      backward(net, p, batch_y, grad);

      const double count = static_cast<double>(p.batch * len);
      const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
      for (std::size_t l = 0; l < net.blocks().size(); ++l) {
        auto& rm = net.running_mean(l);
        auto& rv = net.running_var(l);
        for (std::size_t ch = 0; ch < rm.size(); ++ch) {
          rm[ch] = kBatchNormMomentum * rm[ch] + (1.0 - kBatchNormMomentum) * p.mean[l][ch];
          rv[ch] = kBatchNormMomentum * rv[ch] + (1.0 - kBatchNormMomentum) * p.var[l][ch] * unbias;
        }
      }

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grad[i];
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        theta[i] -= cfg.lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
      }
    }
    model.loss_.push_back(total / static_cast<double>(batches));
  }
  return model;
}

}  // namespace soz
