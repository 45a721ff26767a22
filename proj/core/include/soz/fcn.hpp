#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "soz/model.hpp"
#include "soz/rng.hpp"

namespace soz {

enum class FcnVariant { ts, tsm };

inline constexpr std::array<std::size_t, 3> kFcnKernels = {7, 5, 3};
inline constexpr double kBatchNormEps = 1e-3;
inline constexpr double kBatchNormMomentum = 0.9;

struct FcnConfig {
  FcnVariant variant = FcnVariant::ts;
  std::size_t filters = 64;
  double lr = 1e-3;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  std::size_t train_subsample = 0;  // 0 keeps every row
  /// Multiplier on the z-scored metadata samples of TSM inputs; 0 means
  /// sqrt(series length), which gives one metadata sample the energy of the
  /// whole standardized series.
  double meta_gain = 0.0;
  std::uint64_t seed = 0;
};

/// Offsets of one conv -> batch-norm -> ReLU block inside the flat parameter
/// vector. Conv weights are [out][in][kernel]; there is no conv bias.
struct FcnBlock {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t weight = 0;
  std::size_t gamma = 0;
  std::size_t beta = 0;
};

/// Three same-padded conv blocks, global average pooling, 2-way affine head.
class FcnNet {
 public:
  FcnNet() = default;
  /// Kaiming-uniform conv weights, BN gamma 1 / beta 0, small uniform head.
  FcnNet(std::size_t input_length, std::size_t filters, Rng& rng,
         std::array<std::size_t, 3> kernels = kFcnKernels);

  std::size_t input_length() const noexcept { return length_; }
  std::size_t filters() const noexcept { return filters_; }
  const std::vector<FcnBlock>& blocks() const noexcept { return blocks_; }
  std::size_t head_weight() const noexcept { return head_w_; }  // [2][filters]
  std::size_t head_bias() const noexcept { return head_b_; }

  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }
  std::vector<double>& running_mean(std::size_t block) { return run_mean_[block]; }
  std::vector<double>& running_var(std::size_t block) { return run_var_[block]; }
  const std::vector<double>& running_mean(std::size_t block) const { return run_mean_[block]; }
  const std::vector<double>& running_var(std::size_t block) const { return run_var_[block]; }

 private:
  std::size_t length_ = 0;
  std::size_t filters_ = 0;
  std::vector<FcnBlock> blocks_;
  std::size_t head_w_ = 0;
  std::size_t head_b_ = 0;
  std::vector<double> params_;
  std::vector<std::vector<double>> run_mean_;
  std::vector<std::vector<double>> run_var_;
};

/// (channels, length) of each block output plus the pooled width, recorded
/// by fcn_forward for structural checks.
struct FcnShapes {
  std::vector<std::pair<std::size_t, std::size_t>> block_outputs;
  std::size_t pooled = 0;
};

/// Class probabilities (batch x 2, row-major) for `batch` inputs of length
/// input_length(). With `batch_stats` batch-norm normalises with the batch's
/// own statistics, otherwise with the frozen running statistics.
std::vector<double> fcn_forward(const FcnNet& net, std::span<const double> inputs,
                                std::size_t batch, bool batch_stats = false,
                                FcnShapes* shapes = nullptr);

/// Mean cross-entropy of a batch under batch statistics; fills `grad`
/// (same layout as params()) when given.
double fcn_loss(const FcnNet& net, std::span<const double> inputs, std::span<const int> labels,
                std::vector<double>* grad = nullptr);

/// Per-channel mean over time of a channels x length map.
std::vector<double> global_average_pool(std::span<const double> map, std::size_t channels,
                                        std::size_t length);

class FcnModel final : public Classifier {
 public:
  ProbaMatrix predict_proba(const FeatureMatrix& x) const override;

  const FcnNet& net() const noexcept { return net_; }
  FcnVariant variant() const noexcept { return variant_; }
  /// Entry 0: mean batch loss before training; entry e: mean batch loss of epoch e.
  const std::vector<double>& loss_history() const noexcept { return loss_; }
  /// Network input for one design-matrix row (column selection and scaling).
  std::vector<double> prepare(std::span<const double> row) const;

 private:
  friend FcnModel fcn_train(const FeatureMatrix&, const FcnConfig&);

  FcnVariant variant_ = FcnVariant::ts;
  std::size_t cols_ = 0;
  std::size_t series_cols_ = 0;
  double series_mean_ = 0.0;
  double series_scale_ = 1.0;
  std::vector<double> meta_mean_;
  std::vector<double> meta_scale_;
  FcnNet net_;
  std::vector<double> loss_;
};

/// TS uses the series columns only; TSM appends the metadata columns as
/// trailing samples of the same channel.
FcnModel fcn_train(const FeatureMatrix& train, const FcnConfig& cfg);

}  // namespace soz
