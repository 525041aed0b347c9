#pragma once

// Cloud-side receiving endpoint: accepts raw document bodies over
//   POST /v1/streams/{stream_id}/documents/{index}
// and persists them under storage_dir/{stream_id}/. Uploads carry
// X-Original-Name, X-Processed (0|1) and X-Original-Size headers; the
// response is a small JSON object {stored_bytes, replaced}. Each body is
// written to a temp file and renamed into place, so concurrent uploads to
// distinct documents never interleave and a crash never leaves a torn file.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace edgestream {

struct GatewayConfig {
  std::string listen_address = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path storage_dir;
  std::uint64_t max_body = 256ull * 1024 * 1024;

  void validate() const {
    if (storage_dir.empty()) throw std::invalid_argument("storage_dir must be set");
    if (max_body == 0) throw std::invalid_argument("max_body must be > 0");
    if (listen_port < 0 || listen_port > 65535) throw std::invalid_argument("bad listen port");
  }
};

namespace detail {

// Path components come off the wire; keep only characters that cannot
// escape the storage directory or confuse the filesystem.
inline bool safe_path_component(const std::string& s) {
  if (s.empty() || s.size() > 255 || s == "." || s == "..") return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline std::string extension_of(const std::string& original_name) {
  std::filesystem::path p(original_name);
  std::string ext = p.extension().string();
  return safe_path_component("x" + ext) ? ext : "";
}

}  // namespace detail

class Gateway {
 public:
  explicit Gateway(GatewayConfig config) : config_(std::move(config)) {
    config_.validate();
    std::filesystem::create_directories(config_.storage_dir);

    server_.set_payload_max_length(config_.max_body);
    server_.Post(R"(/v1/streams/([^/]+)/documents/(\d+))",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handle_upload(req, res);
                 });
  }

  // Serves until stop(); returns false if the port could not be bound.
  bool serve() { return server_.listen(config_.listen_address, config_.listen_port); }

  // Binds the listening socket, then serves on a background thread. Throws
  // if the address is not bindable, so callers fail fast. Port 0 binds an
  // ephemeral port, readable from config().listen_port afterwards.
  void start() {
    if (config_.listen_port == 0) {
      int port = server_.bind_to_any_port(config_.listen_address);
      if (port < 0) throw std::runtime_error("cannot bind " + config_.listen_address);
      config_.listen_port = port;
    } else if (!server_.bind_to_port(config_.listen_address, config_.listen_port)) {
      throw std::runtime_error("cannot bind " + config_.listen_address + ":" +
                               std::to_string(config_.listen_port));
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  ~Gateway() { stop(); }

  std::uint64_t documents_stored() const { return documents_stored_.load(); }
  const GatewayConfig& config() const { return config_; }

 private:
  void handle_upload(const httplib::Request& req, httplib::Response& res) {
    auto reject = [&](int status, const std::string& why) {
      res.status = status;
      res.set_content(nlohmann::json{{"error", why}}.dump(), "application/json");
    };

    const std::string stream_id = req.matches[1];
    const std::string index = req.matches[2];
    if (!detail::safe_path_component(stream_id)) return reject(400, "bad stream id");

    if (!req.has_header("X-Original-Name")) return reject(400, "missing X-Original-Name");
    if (!req.has_header("X-Original-Size")) return reject(400, "missing X-Original-Size");
    std::string processed = req.get_header_value("X-Processed");
    if (processed != "0" && processed != "1") return reject(400, "X-Processed must be 0 or 1");
    std::uint64_t original_size = 0;
    try {
      original_size = std::stoull(req.get_header_value("X-Original-Size"));
    } catch (const std::exception&) {
      return reject(400, "X-Original-Size must be a decimal byte count");
    }
    (void)original_size;  // recorded for operators; not validated against body
    if (req.body.size() > config_.max_body) return reject(413, "body too large");

    std::string ext = detail::extension_of(req.get_header_value("X-Original-Name"));
    std::filesystem::path dir = config_.storage_dir / stream_id;
    std::filesystem::path final_path = dir / (index + ext);
    std::filesystem::path temp_path = dir / ("." + index + ext + ".part");

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return reject(500, "cannot create stream directory");

    bool replaced = std::filesystem::exists(final_path);
    {
      std::ofstream out(temp_path, std::ios::binary | std::ios::trunc);
      if (!out || !out.write(req.body.data(), static_cast<std::streamsize>(req.body.size()))) {
        return reject(500, "write failed");
      }
    }
    std::filesystem::rename(temp_path, final_path, ec);
    if (ec) return reject(500, "rename failed");

    documents_stored_.fetch_add(1);
    res.status = 201;
    res.set_content(
        nlohmann::json{{"stored_bytes", req.body.size()}, {"replaced", replaced}}.dump(),
        "application/json");
  }

  GatewayConfig config_;
  httplib::Server server_;
  std::thread thread_;
  std::atomic<std::uint64_t> documents_stored_{0};
};

}  // namespace edgestream
