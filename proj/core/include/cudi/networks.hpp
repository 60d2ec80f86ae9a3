#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cudi/autograd.hpp"
#include "cudi/curve.hpp"
#include "cudi/image.hpp"

namespace cudi {

struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t groups = 1;

  std::size_t weight_count() const { return out_channels * (in_channels / groups) * kernel * kernel; }
};

inline constexpr double kInitStddev = 0.02;

/// fixed: N(0, 0.02^2) everywhere. he: N(0, 2 / fan_in) with
/// fan_in = (in / groups) * k * k, except the output layer, which keeps
/// N(0, 0.02^2) so an untrained network starts near the identity curve.
enum class InitScheme { fixed, he };

/// Ordered conv layers with interleaved (weight, bias) parameter tensors.
class ConvNetwork {
 public:
  std::span<const ConvSpec> layers() const noexcept { return layers_; }
  std::vector<DenseArray>& parameters() noexcept { return params_; }
  const std::vector<DenseArray>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  /// Gaussian weights with zero mean, zero biases. Deterministic per seed.
  void init_weights(std::uint64_t seed, InitScheme scheme = InitScheme::he);

  /// Parameters concatenated in layer order (w0, b0, w1, b1, ...).
  std::vector<float> flatten() const;
  /// Inverse of flatten(); throws CorruptCheckpoint on a length mismatch.
  void unflatten(std::span<const float> flat);

  /// Puts every parameter on `g`, as trainable parameters or as constants.
  template <typename T>
  std::vector<Var> bind(Graph<T>& g, bool trainable) const;

  /// Adjoints of the bound parameters, in parameter order (float).
  template <typename T>
  std::vector<DenseArray> gradients(const Graph<T>& g, std::span<const Var> bound) const;

 protected:
  void add_layer(ConvSpec spec);

  template <typename T>
  Var conv(Graph<T>& g, std::span<const Var> bound, std::size_t layer, Var x) const;

 private:
  std::vector<ConvSpec> layers_;
  std::vector<DenseArray> params_;
};

struct TeacherConfig {
  double width = 1.0;
  std::size_t iterations = kDefaultCurveIterations;

  static TeacherConfig desk_scale() { return {0.25, kDefaultCurveIterations}; }

  /// Encoder widths 32/64/128/256 scaled by `width`, rounded to a multiple
  /// of 4 and at least 4.
  std::array<std::size_t, 4> channels() const;
  std::size_t output_channels() const { return 3 * iterations; }

  bool operator==(const TeacherConfig&) const = default;
};

/// Unet-like curve estimator without spatial scaling: four 3-conv encoder
/// stages, three 3-conv decoder stages fed by channel concatenation with the
/// matching encoder output, and a tanh head producing 3n curve maps.
class TeacherNet : public ConvNetwork {
 public:
  static constexpr std::size_t kInputChannels = 4;

  explicit TeacherNet(TeacherConfig cfg = {});

  const TeacherConfig& config() const noexcept { return cfg_; }

  /// image (B,3,H,W), emap (B,1,H,W) -> curve maps (B,3n,H,W) in [-1,1].
  template <typename T>
  Var forward(Graph<T>& g, Var image, Var emap, std::span<const Var> bound) const;

  CurveParamStack predict(const Image& image, const ExposureMap& emap) const;
  /// Batched inference without a tape: (B,3n,H,W).
  DenseArray predict_batch(const DenseArray& images, const DenseArray& maps) const;

 private:
  TeacherConfig cfg_;
};

struct StudentConfig {
  std::size_t trunk = 16;
  std::size_t downsample = 4;

  bool operator==(const StudentConfig&) const = default;
};

struct StudentOutputs {
  Var low_res;    // (B,6,H/4,W/4) before upsampling
  Var slope;      // (B,3,H,W)
  Var intercept;  // (B,3,H,W)
};

/// Depthwise-separable slope/intercept estimator working on a 4x downsampled
/// copy of (image, emap), upsampled back to input resolution.
class StudentNet : public ConvNetwork {
 public:
  static constexpr std::size_t kInputChannels = 4;
  static constexpr std::size_t kOutputChannels = 6;
  static constexpr std::size_t kMinInputSize = 8;

  explicit StudentNet(StudentConfig cfg = {});

  const StudentConfig& config() const noexcept { return cfg_; }

  template <typename T>
  StudentOutputs forward(Graph<T>& g, Var image, Var emap, std::span<const Var> bound) const;

  TangentMaps predict(const Image& image, const ExposureMap& emap) const;
  /// (B,6,H,W) with slope channels first.
  DenseArray predict_batch(const DenseArray& images, const DenseArray& maps) const;

 private:
  StudentConfig cfg_;
};

extern template std::vector<Var> ConvNetwork::bind<float>(Graph<float>&, bool) const;
extern template std::vector<Var> ConvNetwork::bind<double>(Graph<double>&, bool) const;
extern template std::vector<DenseArray> ConvNetwork::gradients<float>(const Graph<float>&,
                                                                      std::span<const Var>) const;
extern template std::vector<DenseArray> ConvNetwork::gradients<double>(const Graph<double>&,
                                                                       std::span<const Var>) const;
extern template Var TeacherNet::forward<float>(Graph<float>&, Var, Var, std::span<const Var>) const;
extern template Var TeacherNet::forward<double>(Graph<double>&, Var, Var, std::span<const Var>) const;
extern template StudentOutputs StudentNet::forward<float>(Graph<float>&, Var, Var, std::span<const Var>) const;
extern template StudentOutputs StudentNet::forward<double>(Graph<double>&, Var, Var, std::span<const Var>) const;

}  // namespace cudi
