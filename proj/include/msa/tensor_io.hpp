#pragma once

// On-disk tensors: `<id>.json` sidecar (rate, count, channel names), `<id>.f32`
// holding little-endian float32 values row-major as channels x frames, and for
// target tensors `<id>.mask` with one 0/1 byte per frame for each mask channel.

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msa/targets.hpp"

namespace msa {

using FloatMatrix = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RawMatrix {
  double rate = kDefaultFrameRate;
  std::vector<std::string> channels;
  /// channels x frames
  FloatMatrix data;
  /// mask channels x frames, possibly empty
  std::vector<std::string> mask_channels;
  Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> masks;
  /// Song or excerpt duration in seconds, when known.
  std::optional<double> duration;
};

/// Channel names of a target/prediction tensor: "boundary" then the 7 class names.
const std::vector<std::string>& tensor_channel_names();

void write_raw_matrix(const std::filesystem::path& dir, const std::string& id, const RawMatrix& m);
RawMatrix read_raw_matrix(const std::filesystem::path& dir, const std::string& id);

/// Stored values are float32; reading back yields the float-rounded tensor.
void write_target_tensor(const std::filesystem::path& dir, const std::string& id, const TargetTensor& t,
                         const FrameGrid& grid, double duration);
TargetTensor read_target_tensor(const std::filesystem::path& dir, const std::string& id);

/// Reads the boundary + class channels of a tensor file as model outputs.
PredictionCurves read_prediction_curves(const std::filesystem::path& dir, const std::string& id);

/// Feature matrices for the novelty baseline: file channels are feature dims, returned as frames x dims.
Eigen::MatrixXd read_features(const std::filesystem::path& dir, const std::string& id);
void write_features(const std::filesystem::path& dir, const std::string& id, const Eigen::MatrixXd& frames_by_dims,
                    double rate);

/// Ids of all `<id>.json` sidecars in a directory, sorted.
std::vector<std::string> list_tensor_ids(const std::filesystem::path& dir);

}  // namespace msa
