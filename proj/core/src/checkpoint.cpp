#include "cudi/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

namespace cudi {
namespace {

constexpr char kMagic[5] = {'C', 'U', 'D', 'I', '1'};
constexpr std::size_t kHeader = sizeof kMagic + 1 + 4;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof v);
}

template <typename U>
U get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (bytes.size() < pos + sizeof(U)) throw CorruptCheckpoint("checkpoint truncated at byte " + std::to_string(pos));
  U v;
  std::memcpy(&v, bytes.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

std::vector<std::uint8_t> encode(ModelRole role, const nlohmann::json& config, const ConvNetwork& net) {
  const std::string cfg = config.dump();
  const std::vector<float> flat = net.flatten();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(role));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out.insert(out.end(), cfg.begin(), cfg.end());
  put<std::uint64_t>(out, flat.size());
  const auto* p = reinterpret_cast<const std::uint8_t*>(flat.data());
  out.insert(out.end(), p, p + flat.size() * sizeof(float));
  return out;
}

struct Decoded {
  ModelRole role;
  nlohmann::json config;
  std::vector<float> params;
};

Decoded decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CorruptCheckpoint("not a checkpoint (bad magic)");
  }
  Decoded d;
  std::size_t pos = sizeof kMagic;
  const auto role = get<std::uint8_t>(bytes, pos);
  if (role > 1) throw CorruptCheckpoint("unknown role tag " + std::to_string(role));
  d.role = static_cast<ModelRole>(role);
  const auto cfg_len = get<std::uint32_t>(bytes, pos);
  if (bytes.size() < pos + cfg_len) throw CorruptCheckpoint("checkpoint truncated inside config record");
  try {
    d.config = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + cfg_len));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(std::string("config record: ") + e.what());
  }
  pos += cfg_len;
  const auto count = get<std::uint64_t>(bytes, pos);
  const std::size_t remaining = bytes.size() - pos;
  if (count > remaining / sizeof(float) || remaining != count * sizeof(float)) {
    throw CorruptCheckpoint("payload holds " + std::to_string(remaining) + " bytes, header declares " +
                            std::to_string(count) + " parameters");
  }
  d.params.resize(count);
  std::memcpy(d.params.data(), bytes.data() + pos, remaining);
  return d;
}

}  // namespace

std::string_view role_name(ModelRole role) { return role == ModelRole::teacher ? "teacher" : "student"; }

std::vector<std::uint8_t> encode_checkpoint(const TeacherNet& net) {
  const nlohmann::json cfg = {{"width", net.config().width}, {"iterations", net.config().iterations}};
  return encode(ModelRole::teacher, cfg, net);
}

std::vector<std::uint8_t> encode_checkpoint(const StudentNet& net) {
  const nlohmann::json cfg = {{"trunk", net.config().trunk}, {"downsample", net.config().downsample}};
  return encode(ModelRole::student, cfg, net);
}

ModelRole checkpoint_role(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 1 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CorruptCheckpoint("not a checkpoint (bad magic)");
  }
  const std::uint8_t role = bytes[sizeof kMagic];
  if (role > 1) throw CorruptCheckpoint("unknown role tag " + std::to_string(role));
  return static_cast<ModelRole>(role);
}

TeacherNet decode_teacher(std::span<const std::uint8_t> bytes) {
  const Decoded d = decode(bytes);
  if (d.role != ModelRole::teacher) throw RoleMismatch("checkpoint holds a student, expected a teacher");
  TeacherConfig cfg;
  try {
    cfg.width = d.config.at("width").get<double>();
    cfg.iterations = d.config.at("iterations").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(std::string("teacher config: ") + e.what());
  }
  TeacherNet net(cfg);
  net.unflatten(d.params);
  return net;
}

StudentNet decode_student(std::span<const std::uint8_t> bytes) {
  const Decoded d = decode(bytes);
  if (d.role != ModelRole::student) throw RoleMismatch("checkpoint holds a teacher, expected a student");
  StudentConfig cfg;
  try {
    cfg.trunk = d.config.at("trunk").get<std::size_t>();
    cfg.downsample = d.config.at("downsample").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(std::string("student config: ") + e.what());
  }
  StudentNet net(cfg);
  net.unflatten(d.params);
  return net;
}

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptCheckpoint("cannot open checkpoint " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TeacherNet& net) { dump(path, encode_checkpoint(net)); }
void save_checkpoint(const std::filesystem::path& path, const StudentNet& net) { dump(path, encode_checkpoint(net)); }
TeacherNet load_teacher(const std::filesystem::path& path) { return decode_teacher(slurp(path)); }
StudentNet load_student(const std::filesystem::path& path) { return decode_student(slurp(path)); }

Model load_model(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (checkpoint_role(bytes) == ModelRole::teacher) return decode_teacher(bytes);
  return decode_student(bytes);
}

ModelRole model_role(const Model& model) {
  return std::holds_alternative<TeacherNet>(model) ? ModelRole::teacher : ModelRole::student;
}

}  // namespace cudi
