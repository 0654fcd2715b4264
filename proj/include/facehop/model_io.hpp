#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "facehop/model.hpp"

namespace facehop {

// Container layout: magic "FHOP", u32 little-endian format version, a
// payload of length-prefixed sections, and a trailing CRC-32 of the payload.
// Numbers are little-endian; doubles travel as their raw bit patterns, so a
// round trip reproduces the model and the file bit for bit.
std::vector<std::uint8_t> serialize_model(const FaceHopModel& model);
FaceHopModel deserialize_model(const std::vector<std::uint8_t>& bytes);

// File variants; save writes to a temporary sibling and renames into place
// so readers never see a half-written model.
void save_model(const std::filesystem::path& path, const FaceHopModel& model);
FaceHopModel load_model(const std::filesystem::path& path);

}  // namespace facehop
