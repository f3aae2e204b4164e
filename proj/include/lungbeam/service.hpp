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

#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lungbeam/camera.hpp"
#include "lungbeam/transfer_function.hpp"
#include "lungbeam/volume.hpp"

namespace httplib {
class Server;
}

namespace lungbeam {

inline constexpr int kHistogramBins = 256;
inline constexpr int kPreviewDefaultPx = 224;
inline constexpr int kPreviewMinPx = 64;
inline constexpr double kPreviewMaxAngleDeg = 90.0;

struct ServiceConfig {
  std::filesystem::path volumes_dir = ".";
  // PUT documents live here; GET falls back to the presets.
  std::filesystem::path tf_dir = "transfer-functions";
  std::size_t cache_size = 4;
  unsigned render_threads = 0;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Counts over [-1024, 3071] in 16 HU bins; values outside clamp to the end bins.
std::vector<long> hu_histogram(const Volume& volume);

// Request handlers, independent of the transport. Volumes are immutable once
// loaded and shared between concurrent requests.
class PreviewService {
 public:
  explicit PreviewService(ServiceConfig config);

  Response list_volumes() const;
  Response histogram(const std::string& id);
  Response render(const std::string& request_body);
  Response get_tf(const std::string& name) const;
  Response put_tf(const std::string& name, const std::string& body);

  // Number of volume loads from disk so far.
  std::size_t loads() const { return loads_.load(); }
  const ServiceConfig& config() const { return config_; }

 private:
  struct Loaded {
    Volume volume;
    std::optional<MaskGeometry> geometry;  // nullopt when nothing is above air
    std::vector<long> histogram;
  };
  using Handle = std::shared_ptr<const Loaded>;

  std::optional<std::filesystem::path> volume_path(const std::string& id) const;
  Handle acquire(const std::string& id, const std::filesystem::path& path);
  std::optional<TransferFunction> stored_tf(const std::string& name) const;

  ServiceConfig config_;
  std::atomic<std::size_t> loads_{0};

  std::mutex cache_mutex_;
  std::list<std::string> lru_;  // most recent first
  struct Entry {
    std::shared_future<Handle> value;
    std::list<std::string>::iterator position;
  };
  std::map<std::string, Entry> cache_;

  mutable std::mutex tf_mutex_;
};

// Registers the HTTP routes on `server`.
void bind_routes(httplib::Server& server, PreviewService& service);

// Blocks until the server stops. `addr` is "host:port".
void serve(PreviewService& service, const std::string& addr);

}  // namespace lungbeam
