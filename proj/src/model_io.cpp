#include "relnn/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace relnn {
namespace {

using Json = nlohmann::ordered_json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

struct NamedTensor {
  std::string name;
  const Tensor<float>* tensor;
};

std::vector<NamedTensor> bundle_tensors(const ModelBundle& bundle) {
  std::vector<NamedTensor> out{{"click.embedding", &bundle.click.embedding}};
  auto add_net = [&](const std::string& prefix, const FeedForward<float>& net) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const std::string base = prefix + ".layer" + std::to_string(i);
      out.push_back({base + ".weight", &net.layers[i].weight});
      out.push_back({base + ".bias", &net.layers[i].bias});
    }
  };
  add_net("click", bundle.click.head);
  add_net("finetune", bundle.finetune);
  return out;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* section) {
    if (bytes_.size() - pos_ < n) {
      throw ModelFormatError(section, "truncated at byte " + std::to_string(bytes_.size()));
    }
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32(const char* section) {
    const auto b = take(4, section);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::size_t> layer_widths(const FeedForward<float>& net) {
  std::vector<std::size_t> out;
  for (const auto& layer : net.layers) out.push_back(layer.weight.cols());
  return out;
}

FeedForward<float> shaped_net(std::size_t input, const std::vector<std::size_t>& widths) {
  FeedForward<float> net;
  for (const auto w : widths) {
    net.layers.push_back({Tensor<float>({input, w}), Tensor<float>({w})});
    input = w;
  }
  return net;
}

}  // namespace

std::string serialize_model(const ModelBundle& bundle, const Json& metadata) {
  const auto tensors = bundle_tensors(bundle);
  for (const auto& t : tensors) {
    if (!t.tensor->all_finite()) {
      throw std::invalid_argument("save_model: tensor " + t.name + " is not finite");
    }
  }
  if (bundle.vocab.size() != bundle.click.vocab_size()) {
    throw std::invalid_argument("save_model: vocab size does not match the embedding table");
  }

  Json entries = Json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const std::uint64_t bytes = 4 * t.tensor->numel();
    entries.push_back({{"name", t.name}, {"shape", t.tensor->shape()},
                       {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  const auto& tc = bundle.click.config;
  Json manifest = {
      {"format", "relnn-model"},
      {"version", kModelVersion},
      {"vocab_size", bundle.vocab.size()},
      {"mode", mode_name(bundle.mode)},
      {"tower", {{"embed_dim", tc.embed_dim}, {"layers", tc.layers}, {"seed", tc.seed}}},
      {"finetune_layers", layer_widths(bundle.finetune)},
      {"payload_bytes", offset},
      {"tensors", std::move(entries)},
  };
  if (!metadata.is_null()) manifest["metadata"] = metadata;
  const std::string manifest_text = manifest.dump();

  std::string out(kModelMagic);
  out.push_back(static_cast<char>(kModelVersion));
  put_u32(out, static_cast<std::uint32_t>(manifest_text.size()));
  out += manifest_text;
  put_u32(out, static_cast<std::uint32_t>(bundle.vocab.size()));
  for (const auto& term : bundle.vocab.terms()) {
    put_u32(out, static_cast<std::uint32_t>(term.size()));
    out += term;
  }
  out.reserve(out.size() + offset);
  for (const auto& t : tensors) {
    for (const float v : t.tensor->data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

ModelBundle deserialize_model(const std::string& bytes) {
  Reader in(bytes);
  if (bytes.size() < kModelMagic.size() ||
      in.take(kModelMagic.size(), "magic") != kModelMagic) {
    throw ModelFormatError("magic", "not a relnn model file");
  }
  const auto version = static_cast<std::uint8_t>(in.take(1, "version")[0]);
  if (version != kModelVersion) {
    throw ModelFormatError("version", "unsupported version " + std::to_string(version));
  }

  const std::uint32_t manifest_len = in.u32("manifest");
  Json manifest;
  ModelBundle bundle;
  std::vector<Json> entries;
  std::uint64_t payload_bytes = 0;
  try {
    manifest = Json::parse(in.take(manifest_len, "manifest"));
    bundle.mode = parse_mode(manifest.at("mode").get<std::string>());
    const auto& tower = manifest.at("tower");
    bundle.click.config.embed_dim = tower.at("embed_dim").get<std::size_t>();
    bundle.click.config.layers = tower.at("layers").get<std::vector<std::size_t>>();
    bundle.click.config.seed = tower.at("seed").get<std::uint64_t>();
    bundle.click.config.validate();
    const auto vocab_size = manifest.at("vocab_size").get<std::size_t>();
    const std::size_t d = bundle.click.config.embed_dim;
    bundle.click.embedding = Tensor<float>({vocab_size, d});
    bundle.click.head = shaped_net(2 * d, bundle.click.config.layers);
    bundle.finetune =
        shaped_net(2 * d, manifest.at("finetune_layers").get<std::vector<std::size_t>>());
    entries = manifest.at("tensors").get<std::vector<Json>>();
    payload_bytes = manifest.at("payload_bytes").get<std::uint64_t>();
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelFormatError("manifest", e.what());
  }

  const std::uint32_t count = in.u32("vocab");
  if (count != bundle.click.embedding.rows()) {
    throw ModelFormatError("vocab", "term count " + std::to_string(count) +
                                        " does not match vocab_size");
  }
  std::vector<std::string> terms;
  terms.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = in.u32("vocab");
    terms.emplace_back(in.take(len, "vocab"));
  }
  try {
    bundle.vocab = Vocab::from_terms(std::move(terms));
  } catch (const std::exception& e) {
    throw ModelFormatError("vocab", e.what());
  }

  // The manifest must describe exactly the tensors the configs imply, packed
  // back to back.
  const auto expected = bundle_tensors(bundle);
  if (entries.size() != expected.size()) {
    throw ModelFormatError("tensors", "expected " + std::to_string(expected.size()) +
                                          " tensors, manifest lists " +
                                          std::to_string(entries.size()));
  }
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto& want = expected[i];
    try {
      if (e.at("name").get<std::string>() != want.name ||
          e.at("shape").get<std::vector<std::size_t>>() != want.tensor->shape() ||
          e.at("offset").get<std::uint64_t>() != offset ||
          e.at("bytes").get<std::uint64_t>() != 4 * want.tensor->numel()) {
        throw ModelFormatError("tensors", "entry " + std::to_string(i) + " (" + want.name +
                                              ") has a bad name, shape or offset");
      }
    } catch (const ModelFormatError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ModelFormatError("tensors", ex.what());
    }
    offset += 4 * want.tensor->numel();
  }
  if (offset != payload_bytes || in.remaining() != payload_bytes) {
    throw ModelFormatError("payload", "expected " + std::to_string(offset) +
                                          " payload bytes, found " +
                                          std::to_string(in.remaining()));
  }
  for (const auto& t : expected) {
    auto data = const_cast<Tensor<float>*>(t.tensor)->data();
    for (auto& v : data) v = std::bit_cast<float>(in.u32("payload"));
  }
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path,
                const Json& metadata) {
  const std::string bytes = serialize_model(bundle, metadata);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ModelBundle load_model(const std::filesystem::path& path) {
  return deserialize_model(slurp(path));
}

nlohmann::ordered_json read_model_manifest(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  Reader in(bytes);
  if (in.take(std::min(bytes.size(), kModelMagic.size()), "magic") != kModelMagic) {
    throw ModelFormatError("magic", "not a relnn model file");
  }
  in.take(1, "version");
  const std::uint32_t len = in.u32("manifest");
  try {
    return Json::parse(in.take(len, "manifest"));
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError("manifest", e.what());
  }
}

}  // namespace relnn
