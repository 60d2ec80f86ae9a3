#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "cudi/checkpoint.hpp"

namespace cudi {

class ServiceStartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transport-independent reply.
struct ServiceResponse {
  int status = 200;
  std::string content_type;
  std::string body;
  std::map<std::string, std::string> headers;
};

/// One multipart field: raw bytes plus the declared content type.
struct FormField {
  std::string content;
  std::string content_type;
};
using FormFields = std::map<std::string, FormField>;

/// HTTP front end over one immutable model:
///   GET  /v1/health -> {"status":"ok"}
///   POST /v1/adjust (multipart: image, engine, exposure_mode, exposure_value, map)
///        -> image/png with an X-CuDi-Stats JSON header; 400 + JSON error on bad input.
class AdjustService {
 public:
  explicit AdjustService(Model model);
  ~AdjustService();
  AdjustService(const AdjustService&) = delete;
  AdjustService& operator=(const AdjustService&) = delete;

  ServiceResponse health() const;
  ServiceResponse handle_adjust(const FormFields& fields) const;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  /// ServiceStartupError when the port is taken.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires a successful bind().
  void run();
  /// bind() + run() on a background thread; returns the bound port once ready.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cudi
