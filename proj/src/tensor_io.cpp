#include "msa/tensor_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <json.hpp>

#include "msa/error.hpp"
#include "msa/io.hpp"

namespace msa {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kFormatTag = "msakit-tensor";

std::string encode_f32(const FloatMatrix& m) {
  std::string bytes(static_cast<std::size_t>(m.size()) * 4, '\0');
  for (Index i = 0; i < m.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(m.data()[i]);
    for (int b = 0; b < 4; ++b) bytes[static_cast<std::size_t>(i) * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return bytes;
}

void decode_f32(const std::string& bytes, FloatMatrix& m) {
  for (Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i) * 4 + b])) << (8 * b);
    }
    m.data()[i] = std::bit_cast<float>(bits);
  }
}

std::vector<std::string> string_list(const ordered_json& j, const char* key) {
  std::vector<std::string> out;
  if (auto it = j.find(key); it != j.end()) out = it->get<std::vector<std::string>>();
  return out;
}

}  // namespace

const std::vector<std::string>& tensor_channel_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{"boundary"};
    for (auto f : all_functions()) v.emplace_back(class_name(f));
    return v;
  }();
  return names;
}

void write_raw_matrix(const fs::path& dir, const std::string& id, const RawMatrix& m) {
  if (static_cast<std::size_t>(m.data.rows()) != m.channels.size()) {
    throw ShapeMismatch("channel names do not match matrix rows");
  }
  if (!m.mask_channels.empty() && (static_cast<std::size_t>(m.masks.rows()) != m.mask_channels.size() ||
                                   m.masks.cols() != m.data.cols())) {
    throw ShapeMismatch("mask shape does not match data");
  }
  ordered_json side;
  side["format"] = kFormatTag;
  side["rate"] = m.rate;
  side["count"] = m.data.cols();
  if (m.duration) side["duration"] = *m.duration;
  side["channels"] = m.channels;
  side["data"] = id + ".f32";
  write_file_atomic(dir / (id + ".f32"), encode_f32(m.data));
  if (!m.mask_channels.empty()) {
    side["mask_channels"] = m.mask_channels;
    side["mask"] = id + ".mask";
    std::string bytes(reinterpret_cast<const char*>(m.masks.data()), static_cast<std::size_t>(m.masks.size()));
    write_file_atomic(dir / (id + ".mask"), bytes);
  }
  write_file_atomic(dir / (id + ".json"), side.dump(2) + "\n");
}

RawMatrix read_raw_matrix(const fs::path& dir, const std::string& id) {
  const auto side_path = dir / (id + ".json");
  ordered_json side = ordered_json::parse(read_file(side_path), nullptr, false);
  if (side.is_discarded() || !side.is_object() || side.value("format", "") != kFormatTag) {
    throw IoError("not a tensor sidecar: " + side_path.string());
  }
  RawMatrix m;
  try {
    m.rate = side.at("rate").get<double>();
    m.channels = string_list(side, "channels");
    if (side.contains("duration")) m.duration = side.at("duration").get<double>();
    const auto count = side.at("count").get<Index>();
    const auto rows = static_cast<Index>(m.channels.size());
    const auto data = read_file(dir / side.at("data").get<std::string>());
    if (data.size() != static_cast<std::size_t>(rows * count) * 4) {
      throw IoError(fmt::format("{}: expected {} bytes of float32 data, found {}", id, rows * count * 4, data.size()));
    }
    m.data.resize(rows, count);
    decode_f32(data, m.data);
    m.mask_channels = string_list(side, "mask_channels");
    if (!m.mask_channels.empty()) {
      const auto mrows = static_cast<Index>(m.mask_channels.size());
      const auto bytes = read_file(dir / side.at("mask").get<std::string>());
      if (bytes.size() != static_cast<std::size_t>(mrows * count)) throw IoError(id + ": mask size mismatch");
      m.masks.resize(mrows, count);
      std::memcpy(m.masks.data(), bytes.data(), bytes.size());
      if ((m.masks > 1).any()) throw IoError(id + ": mask bytes must be 0 or 1");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(side_path.string() + ": " + e.what());
  }
  return m;
}

void write_target_tensor(const fs::path& dir, const std::string& id, const TargetTensor& t, const FrameGrid& grid,
                         double duration) {
  if (grid.count() != t.frames()) throw GridMismatch("tensor frame count differs from grid");
  RawMatrix m;
  m.rate = grid.rate();
  m.duration = duration;
  m.channels = tensor_channel_names();
  m.data.resize(1 + kNumClasses, t.frames());
  m.data.row(0) = t.boundary.cast<float>().transpose();
  m.data.bottomRows(kNumClasses) = t.function.cast<float>();
  m.mask_channels = {"boundary_mask", "function_mask"};
  m.masks.resize(2, t.frames());
  m.masks.row(0) = t.boundary_mask.transpose();
  m.masks.row(1) = t.function_mask.transpose();
  write_raw_matrix(dir, id, m);
}

namespace {

void require_tensor_channels(const RawMatrix& m, const std::string& id) {
  if (m.channels != tensor_channel_names()) throw IoError(id + ": unexpected channel layout");
}

}  // namespace

TargetTensor read_target_tensor(const fs::path& dir, const std::string& id) {
  auto m = read_raw_matrix(dir, id);
  require_tensor_channels(m, id);
  if (m.mask_channels != std::vector<std::string>{"boundary_mask", "function_mask"}) {
    throw IoError(id + ": target tensor needs boundary_mask and function_mask");
  }
  TargetTensor t;
  t.boundary = m.data.row(0).transpose().cast<double>();
  t.function = m.data.bottomRows(kNumClasses).cast<double>();
  t.boundary_mask = m.masks.row(0).transpose();
  t.function_mask = m.masks.row(1).transpose();
  return t;
}

PredictionCurves read_prediction_curves(const fs::path& dir, const std::string& id) {
  auto m = read_raw_matrix(dir, id);
  require_tensor_channels(m, id);
  return {m.data.row(0).transpose().cast<double>(), m.data.bottomRows(kNumClasses).cast<double>()};
}

Eigen::MatrixXd read_features(const fs::path& dir, const std::string& id) {
  auto m = read_raw_matrix(dir, id);
  return m.data.cast<double>().matrix().transpose();
}

void write_features(const fs::path& dir, const std::string& id, const Eigen::MatrixXd& frames_by_dims, double rate) {
  RawMatrix m;
  m.rate = rate;
  for (Index d = 0; d < frames_by_dims.cols(); ++d) m.channels.push_back(fmt::format("f{}", d));
  m.data = frames_by_dims.transpose().cast<float>().array();
  write_raw_matrix(dir, id, m);
}

std::vector<std::string> list_tensor_ids(const fs::path& dir) {
  std::vector<std::string> ids;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    // Config echoes and other JSON live alongside; a tensor always has its data file.
    if (entry.is_regular_file() && p.extension() == ".json" && fs::exists(fs::path(p).replace_extension(".f32"))) {
      ids.push_back(p.stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace msa
