#include "cudi/service.hpp"

#include <sys/socket.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cudi/image_io.hpp"
#include "cudi/pipeline.hpp"

namespace cudi {
namespace {

using nlohmann::json;

ServiceResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump(), {}};
}

ServiceResponse bad_request(const std::string& message) { return json_response(400, {{"error", message}}); }

const FormField* field(const FormFields& fields, const std::string& key) {
  const auto it = fields.find(key);
  return it == fields.end() ? nullptr : &it->second;
}

std::string text_field(const FormFields& fields, const std::string& key, const std::string& fallback) {
  const FormField* f = field(fields, key);
  return f == nullptr ? fallback : f->content;
}

std::span<const std::uint8_t> bytes_of(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

float parse_unit(const std::string& text) {
  char* end = nullptr;
  const float v = std::strtof(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ContractViolation("exposure_value '" + text + "' is not a number");
  }
  return v;
}

ExposureSpec parse_exposure(const FormFields& fields) {
  const std::string mode = text_field(fields, "exposure_mode", "uniform");
  if (mode == "uniform") {
    const std::string v = text_field(fields, "exposure_value", "");
    if (v.empty()) throw ContractViolation("exposure_mode 'uniform' needs exposure_value");
    if (v == "under" || v == "over") return UniformExposure{preset_value(parse_preset(v))};
    return UniformExposure{parse_unit(v)};
  }
  if (mode == "auto") return AutoExposure{parse_preset(text_field(fields, "exposure_value", "under"))};
  if (mode == "map") {
    const FormField* m = field(fields, "map");
    if (m == nullptr || m->content.empty()) throw ContractViolation("exposure_mode 'map' needs a map PNG");
    return PaintedExposure{decode_map_png(bytes_of(m->content))};
  }
  throw ContractViolation("unknown exposure_mode '" + mode + "' (expected uniform|auto|map)");
}

}  // namespace

struct AdjustService::Impl {
  Model model;
  httplib::Server server;
  std::thread worker;
  bool bound = false;

  explicit Impl(Model m) : model(std::move(m)) {}
};

AdjustService::AdjustService(Model model) : impl_(std::make_unique<Impl>(std::move(model))) {
  auto& srv = impl_->server;
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  srv.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    const ServiceResponse r = health();
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  srv.Post("/v1/adjust", [this](const httplib::Request& req, httplib::Response& res) {
    ServiceResponse r;
    if (!req.is_multipart_form_data()) {
      r = bad_request("expected multipart/form-data");
    } else {
      FormFields fields;
      for (const auto& [name, part] : req.files) fields[name] = FormField{part.content, part.content_type};
      r = handle_adjust(fields);
    }
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  });
}

AdjustService::~AdjustService() { stop(); }

ServiceResponse AdjustService::health() const { return json_response(200, {{"status", "ok"}}); }

ServiceResponse AdjustService::handle_adjust(const FormFields& fields) const {
  try {
    const FormField* img = field(fields, "image");
    if (img == nullptr || img->content.empty()) return bad_request("missing 'image' field");
    AdjustRequest request;
    request.image = decode_png(bytes_of(img->content));
    request.engine = parse_engine(text_field(fields, "engine", "student"));
    request.exposure = parse_exposure(fields);
    const AdjustResult result = adjust(request, impl_->model);
    const auto png = encode_png(result.image);

    json stats = {{"mean_brightness", result.stats.mean_brightness}, {"elapsed_ms", result.stats.elapsed_ms}};
    stats["region_mean_error"] =
        result.stats.region_mean_error ? json(*result.stats.region_mean_error) : json(nullptr);
    ServiceResponse r{200, "image/png", std::string(png.begin(), png.end()), {}};
    r.headers["X-CuDi-Stats"] = stats.dump();
    return r;
  } catch (const ImageDecodeError& e) {
    return bad_request(e.what());
  } catch (const ContractViolation& e) {
    return bad_request(e.what());
  } catch (const ConfigError& e) {
    return bad_request(e.what());
  } catch (const RoleMismatch& e) {
    return bad_request(e.what());
  } catch (const std::exception& e) {
    return json_response(500, {{"error", e.what()}});
  }
}

int AdjustService::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound_port = port;
  if (port == 0) {
    bound_port = srv.bind_to_any_port(host);
    if (bound_port < 0) throw ServiceStartupError("cannot bind " + host + " to any port");
  } else if (!srv.bind_to_port(host, port)) {
    throw ServiceStartupError("cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
  }
  impl_->bound = true;
  return bound_port;
}

void AdjustService::run() {
  if (!impl_->bound) throw ServiceStartupError("run() before bind()");
  impl_->server.listen_after_bind();
}

int AdjustService::start(const std::string& host, int port) {
  const int bound_port = bind(host, port);
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound_port;
}

void AdjustService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace cudi
