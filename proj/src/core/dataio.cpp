// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/SVD>
#include <json.hpp>

#include "flipnerf/error.hpp"

namespace flipnerf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedTransforms, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

fs::path image_path(const fs::path& root, const std::string& file_path) {
  fs::path p = root / fs::path(file_path).lexically_normal();
  if (!p.has_extension()) p += ".png";
  return p;
}

Pose parse_transform(const json& frame, const std::string& where) {
  if (!frame.contains("transform_matrix")) {
    throw Error(ErrorKind::MalformedTransforms, where + " lacks transform_matrix");
  }
  const json& m = frame["transform_matrix"];
  if (!m.is_array() || m.size() != 4) {
    throw Error(ErrorKind::MalformedTransforms, where + ": transform_matrix must be 4x4");
  }
  Mat4 mat;
  for (int r = 0; r < 4; ++r) {
    const json& row = m[static_cast<size_t>(r)];
    if (!row.is_array() || row.size() != 4) {
      throw Error(ErrorKind::MalformedTransforms, where + ": transform_matrix must be 4x4");
    }
    for (int c = 0; c < 4; ++c) {
      const json& x = row[static_cast<size_t>(c)];
      if (!x.is_number()) throw Error(ErrorKind::MalformedTransforms, where + ": non-numeric entry");
      mat(r, c) = x.get<double>();
    }
  }
  if (!mat.allFinite()) throw Error(ErrorKind::MalformedTransforms, where + ": non-finite entry");
  Pose pose = Pose::from_matrix(mat);
  const double det = pose.rotation.determinant();
  if (!(std::abs(det) > 1e-9)) {
    throw Error(ErrorKind::MalformedTransforms, where + ": transform_matrix is not invertible");
  }
  if (det < 0.0) {
    throw Error(ErrorKind::MalformedTransforms, where + ": rotation part is a reflection");
  }
  // Files store ~7 significant digits; snap to the nearest rotation.
  Eigen::JacobiSVD<Mat3> svd(pose.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  pose.rotation = svd.matrixU() * svd.matrixV().transpose();
  return pose;
}

struct ParsedSplit {
  double camera_angle_x = 0.0;
  std::vector<View> views;
};

ParsedSplit parse_split_file(const fs::path& root, const fs::path& file) {
  const json j = read_json(file);
  const std::string name = file.filename().string();
  if (!j.is_object() || !j.contains("camera_angle_x") || !j["camera_angle_x"].is_number()) {
    throw Error(ErrorKind::MalformedTransforms, name + ": missing numeric camera_angle_x");
  }
  if (!j.contains("frames") || !j["frames"].is_array()) {
    throw Error(ErrorKind::MalformedTransforms, name + ": missing frames list");
  }
  ParsedSplit out;
  out.camera_angle_x = j["camera_angle_x"].get<double>();
  if (!(out.camera_angle_x > 0.0 && out.camera_angle_x < M_PI)) {
    throw Error(ErrorKind::MalformedTransforms, name + ": camera_angle_x out of range");
  }
  const json& frames = j["frames"];
  for (size_t i = 0; i < frames.size(); ++i) {
    const json& f = frames[i];
    std::string where = name + " frame " + std::to_string(i);
    if (!f.is_object() || !f.contains("file_path") || !f["file_path"].is_string()) {
      throw Error(ErrorKind::MalformedTransforms, where + " lacks file_path");
    }
    View v;
    v.file_path = f["file_path"].get<std::string>();
    where += " (" + v.file_path + ")";
    v.pose = parse_transform(f, where);
    v.image = read_png(image_path(root, v.file_path));
    v.intr.width = v.image.width;
    v.intr.height = v.image.height;
    v.intr.focal = focal_from_angle(v.image.width, out.camera_angle_x);
    v.intr.cx = 0.5 * v.image.width;
    v.intr.cy = 0.5 * v.image.height;
    if (!out.views.empty() && !out.views.front().image.same_shape(v.image)) {
      throw Error(ErrorKind::MalformedTransforms, where + ": image size differs within the split");
    }
    out.views.push_back(std::move(v));
  }
  return out;
}

json plane_json(const Plane& p) {
  return json{{"normal", {p.normal.x(), p.normal.y(), p.normal.z()}}, {"offset", p.offset}};
}

}  // namespace

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Upper: return "upper";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "upper") return Split::Upper;
  throw Error(ErrorKind::InvalidArgument, "unknown split '" + std::string(s) + "'");
}

const std::vector<View>& Dataset::split(Split s) const {
  switch (s) {
    case Split::Train: return train;
    case Split::Test: return test;
    case Split::Upper: return upper;
  }
  return train;
}

double focal_from_angle(int width, double camera_angle_x) {
  return 0.5 * width / std::tan(0.5 * camera_angle_x);
}

Dataset load_nerf_synthetic(const fs::path& dir) {
  const fs::path train_file = dir / "transforms_train.json";
  if (!fs::exists(train_file)) {
    throw Error(ErrorKind::MissingFile, "no transforms_train.json in " + dir.string());
  }
  Dataset ds;
  ds.root = dir;
  ParsedSplit train = parse_split_file(dir, train_file);
  ds.camera_angle_x = train.camera_angle_x;
  ds.train = std::move(train.views);
  if (fs::exists(dir / "transforms_test.json")) ds.test = parse_split_file(dir, dir / "transforms_test.json").views;
  if (fs::exists(dir / "transforms_upper.json")) ds.upper = parse_split_file(dir, dir / "transforms_upper.json").views;

  if (fs::exists(dir / "scene.json")) {
    const json meta = read_json(dir / "scene.json");
    try {
      ds.scene_name = meta.value("scene", std::string());
      if (meta.contains("mirror_plane")) {
        const auto& p = meta["mirror_plane"];
        const auto n = p.at("normal").get<std::vector<double>>();
        if (n.size() != 3) throw Error(ErrorKind::MalformedTransforms, "scene.json: normal needs 3 entries");
        ds.declared_mirror = Plane::through(Vec3::Zero(), Vec3(n[0], n[1], n[2]));
        ds.declared_mirror->offset = p.at("offset").get<double>();
      }
      if (meta.contains("arc_config_n")) ds.arc_config_n = meta["arc_config_n"].get<int>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedTransforms, std::string("scene.json: ") + e.what());
    }
  }

  double max_r = 0.0;
  for (const auto* split : {&ds.train, &ds.test, &ds.upper}) {
    for (const auto& v : *split) max_r = std::max(max_r, v.pose.translation.norm());
  }
  if (max_r > kNormalizedCameraRadius * (1.0 + 1e-9)) ds.normalization.scale = kNormalizedCameraRadius / max_r;
  for (auto* split : {&ds.train, &ds.test, &ds.upper}) {
    for (auto& v : *split) v.pose = ds.normalization.apply(v.pose);
  }
  if (ds.declared_mirror) ds.declared_mirror = ds.normalization.apply(*ds.declared_mirror);
  return ds;
}

void write_transforms(const fs::path& path, double camera_angle_x, const std::vector<TransformsFrame>& frames) {
  json j;
  j["camera_angle_x"] = camera_angle_x;
  j["frames"] = json::array();
  for (const auto& f : frames) {
    const Mat4 m = f.pose.matrix();
    json rows = json::array();
    for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    j["frames"].push_back({{"file_path", f.file_path}, {"transform_matrix", rows}});
  }
  write_json(path, j);
}

std::vector<int> DatasetConfig::zero_based() const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(i - 1);
  return out;
}

DatasetConfig make_config(int n) {
  if (n < 1 || n > kConfigCount) {
    throw Error(ErrorKind::InvalidArgument, "config index must be in [1, 8], got " + std::to_string(n));
  }
  DatasetConfig cfg;
  cfg.n = n;
  for (int k = 1; k <= kViewsPerConfig; ++k) cfg.indices.push_back(((2 * n - 1) + k - 2) % kRingSize + 1);
  return cfg;
}

std::vector<DatasetConfig> make_configs(std::size_t ring_count) {
  if (ring_count != kRingSize) {
    throw Error(ErrorKind::WrongCount,
                "configurations need exactly 16 ring images, got " + std::to_string(ring_count));
  }
  std::vector<DatasetConfig> out;
  for (int n = 1; n <= kConfigCount; ++n) out.push_back(make_config(n));
  return out;
}

Observation flip_observation(const Observation& obs) {
  if (obs.is_flipped) throw Error(ErrorKind::AlreadyFlipped, "observation '" + obs.label + "' is already flipped");
  Observation out = obs;
  out.image = mirror_horizontal(obs.image);
  // Rays go through pixel centers u + 0.5, so the mirrored principal point is W - cx.
  out.intr.cx = obs.intr.width - obs.intr.cx;
  out.is_flipped = true;
  out.pose_trainable = true;
  out.label = obs.label + "_flipped";
  return out;
}

Pose ring_pose(const RingSpec& ring, int index) {
  const double az = (ring.phase_deg + 360.0 * index / ring.count) * M_PI / 180.0;
  Pose p;
  p.translation = Vec3(ring.radius * std::cos(az), ring.radius * std::sin(az), ring.height);
  p.rotation = look_at_rotation(p.translation, Vec3::Zero(), Vec3::UnitZ());
  return p;
}

Dataset generate_synthetic_dataset(const SyntheticScene& scene, const RingSpec& ring, const fs::path& dir) {
  if (ring.count != kRingSize) {
    throw Error(ErrorKind::WrongCount, "the ring must hold 16 views");
  }
  if (!(ring.radius > 0.0) || ring.size < 11) {
    throw Error(ErrorKind::InvalidArgument, "ring radius must be positive and images at least 11 px");
  }
  std::error_code ec;
  for (const char* sub : {"train", "test", "upper"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }

  CameraIntrinsics intr;
  intr.width = intr.height = ring.size;
  intr.focal = focal_from_angle(ring.size, ring.camera_angle_x);
  intr.cx = intr.cy = 0.5 * ring.size;

  Dataset ds;
  ds.root = dir;
  ds.camera_angle_x = ring.camera_angle_x;
  ds.declared_mirror = scene.mirror;
  ds.scene_name = scene.name;
  ds.arc_config_n = 1;

  auto emit = [&](const std::string& split, const std::vector<int>& ring_indices, std::vector<View>& dst) {
    std::vector<TransformsFrame> frames;
    for (size_t k = 0; k < ring_indices.size(); ++k) {
      View v;
      v.file_path = "./" + split + "/r_" + std::to_string(k);
      v.pose = ring_pose(ring, ring_indices[k]);
      v.intr = intr;
      v.image = quantize_8bit(synth_scene_render(scene, v.pose, intr));
      write_png(image_path(dir, v.file_path), v.image);
      frames.push_back({v.file_path, v.pose});
      dst.push_back(std::move(v));
    }
    write_transforms(dir / ("transforms_" + split + ".json"), ring.camera_angle_x, frames);
  };

  std::vector<int> all(kRingSize);
  for (int i = 0; i < kRingSize; ++i) all[static_cast<size_t>(i)] = i;
  // Config 1 observes ring indices 0..7; the diametrically opposite views are 8..15.
  std::vector<int> opposite;
  for (int i : make_config(1).zero_based()) opposite.push_back((i + kRingSize / 2) % kRingSize);
  emit("train", all, ds.train);
  emit("test", opposite, ds.test);
  emit("upper", opposite, ds.upper);

  json meta;
  meta["scene"] = scene.name;
  meta["mirror_plane"] = plane_json(scene.mirror);
  meta["arc_config_n"] = 1;
  meta["ring"] = {{"count", ring.count},   {"radius", ring.radius},
                  {"height", ring.height}, {"size", ring.size},
                  {"camera_angle_x", ring.camera_angle_x}, {"phase_deg", ring.phase_deg}};
  write_json(dir / "scene.json", meta);
  return ds;
}

std::vector<View> views_for(const Dataset& ds, Split split, int config_n) {
  const DatasetConfig cfg = make_config(config_n);
  if (ds.train.size() != static_cast<size_t>(kRingSize)) {
    throw Error(ErrorKind::WrongCount,
                "configurations need exactly 16 ring images, got " + std::to_string(ds.train.size()));
  }
  const auto inputs = cfg.zero_based();
  std::vector<View> out;
  if (split == Split::Train) {
    for (int i : inputs) out.push_back(ds.train[static_cast<size_t>(i)]);
    return out;
  }
  const auto& file_views = ds.split(split);
  if (!file_views.empty() && (!ds.arc_config_n || *ds.arc_config_n == config_n)) return file_views;
  for (int i : inputs) out.push_back(ds.train[static_cast<size_t>((i + kRingSize / 2) % kRingSize)]);
  return out;
}

}  // namespace flipnerf
