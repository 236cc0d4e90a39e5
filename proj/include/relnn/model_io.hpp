// Single-file model container: magic, version, JSON manifest, vocab and raw
// little-endian float32 tensors.

#ifndef RELNN_MODEL_IO_HPP_
#define RELNN_MODEL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "relnn/finetune.hpp"

namespace relnn {

// The file opens with "RELNN" and the version byte, six bytes in all.
inline constexpr std::string_view kModelMagic = "RELNN";
inline constexpr std::uint8_t kModelVersion = 1;

// Unreadable or inconsistent model file. section() is one of "magic",
// "version", "manifest", "vocab", "tensors", "payload".
class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(std::string section, const std::string& detail)
      : std::runtime_error("corrupt model file (" + section + "): " + detail),
        section_(std::move(section)) {}
  const std::string& section() const { return section_; }

 private:
  std::string section_;
};

// Serialized bytes. `metadata` is stored verbatim under "metadata" in the
// manifest. Throws std::invalid_argument when any tensor is non-finite.
std::string serialize_model(const ModelBundle& bundle,
                            const nlohmann::ordered_json& metadata = {});
ModelBundle deserialize_model(const std::string& bytes);

// Throws std::runtime_error when the path cannot be written.
void save_model(const ModelBundle& bundle, const std::filesystem::path& path,
                const nlohmann::ordered_json& metadata = {});
// Throws std::runtime_error when the file cannot be opened and
// ModelFormatError on a malformed file.
ModelBundle load_model(const std::filesystem::path& path);

// Manifest only, without reading tensors.
nlohmann::ordered_json read_model_manifest(const std::filesystem::path& path);

}  // namespace relnn

#endif  // RELNN_MODEL_IO_HPP_
