#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "cudi/networks.hpp"

namespace cudi {

enum class ModelRole : std::uint8_t { teacher = 0, student = 1 };

std::string_view role_name(ModelRole role);

// Layout (little-endian):
//   "CUDI1" | role u8 | config_len u32 | config JSON | count u64 | count x f32
std::vector<std::uint8_t> encode_checkpoint(const TeacherNet& net);
std::vector<std::uint8_t> encode_checkpoint(const StudentNet& net);

/// Role tag of an encoded checkpoint; CorruptCheckpoint on a bad header.
ModelRole checkpoint_role(std::span<const std::uint8_t> bytes);

/// RoleMismatch when the tag names the other network.
TeacherNet decode_teacher(std::span<const std::uint8_t> bytes);
StudentNet decode_student(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const TeacherNet& net);
void save_checkpoint(const std::filesystem::path& path, const StudentNet& net);
TeacherNet load_teacher(const std::filesystem::path& path);
StudentNet load_student(const std::filesystem::path& path);

using Model = std::variant<TeacherNet, StudentNet>;
Model load_model(const std::filesystem::path& path);
ModelRole model_role(const Model& model);

}  // namespace cudi
