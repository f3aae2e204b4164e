// Copyright 2026 The Lungbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lungbeam/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <json.hpp>

#include "lungbeam/error.hpp"
#include "lungbeam/image.hpp"
#include "lungbeam/nifti.hpp"
#include "lungbeam/preprocess.hpp"
#include "lungbeam/renderer.hpp"

namespace lungbeam {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response error_response(int status, const std::string& kind, const std::string& message) {
  return json_response(status, json{{"error", kind}, {"message", message}});
}

struct BadRequest {
  std::string message;
};

std::optional<std::string> volume_id_of(const fs::path& path) {
  const std::string name = path.filename().string();
  for (const std::string ext : {".nii.gz", ".nii"}) {
    if (name.size() > ext.size() && name.ends_with(ext)) return name.substr(0, name.size() - ext.size());
  }
  return std::nullopt;
}

bool valid_token(const std::string& s) {
  if (s.empty() || s.size() > 128 || s.front() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-' || c == '.'; });
}

std::vector<std::pair<std::string, fs::path>> scan_volumes(const fs::path& dir) {
  std::vector<std::pair<std::string, fs::path>> out;
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot list " + dir.string());
  for (const auto& entry : it) {
    if (!entry.is_regular_file()) continue;
    if (auto id = volume_id_of(entry.path()); id && valid_token(*id)) out.emplace_back(*id, entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename T>
T field(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc[key];
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw BadRequest{std::string(key) + ": expected a string"};
    return v.get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw BadRequest{std::string(key) + ": expected an integer"};
    return v.get<T>();
  } else {
    if (!v.is_number()) throw BadRequest{std::string(key) + ": expected a number"};
    return v.get<T>();
  }
}

}  // namespace

std::vector<long> hu_histogram(const Volume& volume) {
  std::vector<long> bins(kHistogramBins, 0);
  const double width = (kMaxHu - kAirHu + 1.0) / kHistogramBins;
  for (float v : volume.voxels) {
    const double pos = std::floor((static_cast<double>(v) - kAirHu) / width);
    const int bin = std::isnan(pos) ? 0 : static_cast<int>(std::clamp(pos, 0.0, kHistogramBins - 1.0));
    ++bins[bin];
  }
  return bins;
}

PreviewService::PreviewService(ServiceConfig config) : config_(std::move(config)) {
  if (config_.cache_size == 0) config_.cache_size = 1;
}

std::optional<fs::path> PreviewService::volume_path(const std::string& id) const {
  if (!valid_token(id)) return std::nullopt;
  for (const std::string ext : {".nii", ".nii.gz"}) {
    const fs::path p = config_.volumes_dir / (id + ext);
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

PreviewService::Handle PreviewService::acquire(const std::string& id, const fs::path& path) {
  std::promise<Handle> promise;
  std::shared_future<Handle> future;
  bool owner = false;
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(id); it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.position);
      future = it->second.value;
    } else {
      owner = true;
      future = promise.get_future().share();
      lru_.push_front(id);
      cache_.emplace(id, Entry{future, lru_.begin()});
      while (cache_.size() > config_.cache_size) {
        cache_.erase(lru_.back());
        lru_.pop_back();
      }
    }
  }
  if (!owner) return future.get();

  try {
    ++loads_;
    auto loaded = std::make_shared<Loaded>();
    loaded->volume = read_nifti(path);
    loaded->histogram = hu_histogram(loaded->volume);
    const BinaryMask mask = mask_from_foreground(loaded->volume);
    if (!mask.empty()) loaded->geometry = mask_geometry(mask);
    promise.set_value(std::move(loaded));
  } catch (...) {
    promise.set_exception(std::current_exception());
    // Failed loads are not cached.
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(id); it != cache_.end() && it->second.value.valid()) {
      lru_.erase(it->second.position);
      cache_.erase(it);
    }
  }
  return future.get();
}

Response PreviewService::list_volumes() const {
  try {
    json out = json::array();
    for (const auto& [id, path] : scan_volumes(config_.volumes_dir)) {
      const nifti::Header h = nifti::read_header(path);
      const Dims d = h.dims();
      const Vec3 s = h.spacing();
      out.push_back({{"id", id}, {"dims", {d[0], d[1], d[2]}}, {"spacing", {s.x, s.y, s.z}}});
    }
    return json_response(200, out);
  } catch (const Error& e) {
    return error_response(500, std::string(to_string(e.code())), e.detail());
  }
}

Response PreviewService::histogram(const std::string& id) {
  const auto path = volume_path(id);
  if (!path) return error_response(404, "NotFound", "unknown volume '" + id + "'");
  try {
    const Handle h = acquire(id, *path);
    return json_response(200, json{{"id", id},
                                   {"min_hu", kAirHu},
                                   {"max_hu", kMaxHu},
                                   {"bin_width", (kMaxHu - kAirHu + 1.0) / kHistogramBins},
                                   {"bins", h->histogram}});
  } catch (const Error& e) {
    return error_response(500, std::string(to_string(e.code())), e.detail());
  }
}

std::optional<TransferFunction> PreviewService::stored_tf(const std::string& name) const {
  if (!valid_token(name)) return std::nullopt;
  const fs::path p = config_.tf_dir / (name + ".json");
  std::lock_guard lock(tf_mutex_);
  std::error_code ec;
  if (fs::is_regular_file(p, ec)) return load_tf_file(p);
  if (auto id = parse_preset(name)) return preset(*id);
  return std::nullopt;
}

Response PreviewService::render(const std::string& request_body) {
  json doc;
  try {
    doc = json::parse(request_body);
  } catch (const json::exception& e) {
    return error_response(400, "BadRequest", std::string("invalid JSON: ") + e.what());
  }

  std::string volume_id;
  Plane plane = Plane::Axial;
  SweepAxis axis = SweepAxis::Horizontal;
  double angle = 0.0;
  int resolution = kPreviewDefaultPx;
  RenderOptions ropts;
  ropts.threads = config_.render_threads;
  try {
    if (!doc.is_object()) throw BadRequest{"expected a JSON object"};
    for (const auto& [key, _] : doc.items()) {
      static const std::set<std::string> known{"volume_id", "tf",         "plane",  "sweep_axis",
                                               "angle_deg", "resolution", "step_mm"};
      if (!known.count(key)) throw BadRequest{"unknown field '" + key + "'"};
    }
    if (!doc.contains("volume_id")) throw BadRequest{"volume_id is required"};
    volume_id = field<std::string>(doc, "volume_id", "");
    try {
      plane = parse_plane(field<std::string>(doc, "plane", "axial"));
      axis = parse_sweep_axis(field<std::string>(doc, "sweep_axis", "h"));
    } catch (const Error& e) {
      throw BadRequest{e.detail()};
    }
    if (plane == Plane::Sagittal) throw BadRequest{"sagittal views are not rendered"};
    angle = field<double>(doc, "angle_deg", 0.0);
    if (!std::isfinite(angle) || std::abs(angle) > kPreviewMaxAngleDeg)
      throw BadRequest{"angle_deg must lie in [-90, 90]"};
    resolution = field<int>(doc, "resolution", kPreviewDefaultPx);
    if (resolution < kPreviewMinPx || resolution > kDefaultImagePx)
      throw BadRequest{"resolution must lie in [64, 448]"};
    ropts.step_mm = field<double>(doc, "step_mm", kDefaultStepMm);
    if (!std::isfinite(ropts.step_mm) || ropts.step_mm < 0.05 || ropts.step_mm > 5.0)
      throw BadRequest{"step_mm must lie in [0.05, 5]"};
    if (doc.contains("tf") && !doc["tf"].is_string() && !doc["tf"].is_object())
      throw BadRequest{"tf: expected a preset name or a document"};
  } catch (const BadRequest& e) {
    return error_response(400, "BadRequest", e.message);
  }

  TransferFunction tf;
  try {
    if (!doc.contains("tf")) {
      tf = preset(kDefaultPreset);
    } else if (doc["tf"].is_string()) {
      const std::string name = doc["tf"].get<std::string>();
      auto found = stored_tf(name);
      if (!found) return error_response(422, "UnknownPreset", "unknown transfer function '" + name + "'");
      tf = std::move(*found);
    } else {
      tf = load_tf(doc["tf"].dump());
    }
  } catch (const Error& e) {
    return error_response(422, std::string(to_string(e.code())), e.detail());
  }

  const auto path = volume_path(volume_id);
  if (!path) return error_response(404, "NotFound", "unknown volume '" + volume_id + "'");
  try {
    const Handle h = acquire(volume_id, *path);
    if (!h->geometry) return error_response(409, "EmptyMask", "volume has no voxels above air");
    const Camera cam = camera_pose(plane, axis, angle, *h->geometry, resolution);
    const Image img = lungbeam::render(h->volume, tf, cam, ropts);
    const auto png = encode_png(img);
    return {200, "image/png", std::string(png.begin(), png.end())};
  } catch (const Error& e) {
    const int status = e.code() == ErrorCode::NonIsotropicVolume ? 409 : 500;
    return error_response(status, std::string(to_string(e.code())), e.detail());
  }
}

Response PreviewService::get_tf(const std::string& name) const {
  if (!valid_token(name)) return error_response(400, "BadRequest", "invalid name '" + name + "'");
  try {
    auto tf = stored_tf(name);
    if (!tf) return error_response(404, "NotFound", "unknown transfer function '" + name + "'");
    return {200, "application/json", serialize_tf(*tf)};
  } catch (const Error& e) {
    return error_response(500, std::string(to_string(e.code())), e.detail());
  }
}

Response PreviewService::put_tf(const std::string& name, const std::string& body) {
  if (!valid_token(name)) return error_response(400, "BadRequest", "invalid name '" + name + "'");
  TransferFunction tf;
  try {
    tf = load_tf(body);
  } catch (const Error& e) {
    return error_response(422, std::string(to_string(e.code())), e.detail());
  }
  if (tf.name != name)
    return error_response(422, "SchemaViolation", "/name: document name '" + tf.name + "' does not match '" + name + "'");
  try {
    std::lock_guard lock(tf_mutex_);
    std::error_code ec;
    fs::create_directories(config_.tf_dir, ec);
    if (ec) fail(ErrorCode::IoFailure, "cannot create " + config_.tf_dir.string());
    save_tf_file(tf, config_.tf_dir / (name + ".json"));
  } catch (const Error& e) {
    return error_response(500, std::string(to_string(e.code())), e.detail());
  }
  return {200, "application/json", serialize_tf(tf)};
}

void bind_routes(httplib::Server& server, PreviewService& service) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/volumes", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.list_volumes());
  });
  server.Get(R"(/volumes/([^/]+)/histogram)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.histogram(req.matches[1]));
  });
  server.Post("/render", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.render(req.body));
  });
  server.Get(R"(/transfer-functions/([^/]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_tf(req.matches[1]));
  });
  server.Put(R"(/transfer-functions/([^/]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.put_tf(req.matches[1], req.body));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", "Internal"}, {"message", message}}.dump(), "application/json");
  });
}

void serve(PreviewService& service, const std::string& addr) {
  std::string host = "127.0.0.1";
  std::string port_text = addr;
  if (const auto colon = addr.rfind(':'); colon != std::string::npos) {
    host = addr.substr(0, colon);
    port_text = addr.substr(colon + 1);
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    fail(ErrorCode::Usage, "invalid address '" + addr + "', expected host:port");
  }
  httplib::Server server;
  bind_routes(server, service);
  if (!server.bind_to_port(host, port)) fail(ErrorCode::IoFailure, "cannot bind " + addr);
  if (!server.listen_after_bind()) fail(ErrorCode::IoFailure, "server on " + addr + " stopped unexpectedly");
}

}  // namespace lungbeam
