#include "purets/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include <json.hpp>

#include "purets/io.hpp"

namespace purets {

namespace {

constexpr char kMagic[8] = {'P', 'T', 'S', 'C', 'K', 'P', 'T', '1'};

void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void append_f64_le(std::string& out, const Scalar* src, std::size_t count) {
  static_assert(sizeof(Scalar) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.append(reinterpret_cast<const char*>(src), count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, src + i, 8);
      append_u64_le(out, bits);
    }
  }
}

void read_f64_le(const char* src, Scalar* dst, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t bits = read_u64_le(src + 8 * i);
      std::memcpy(dst + i, &bits, 8);
    }
  }
}

const char* activation_name(Activation a) {
  return a == Activation::Sigmoid ? "sigmoid" : "none";
}

Activation activation_from(const std::string& s) {
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "none") return Activation::None;
  throw ParseError("checkpoint: unknown activation '" + s + "'");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LinearStack& m,
                     const std::map<std::string, std::string>& config) {
  m.validate();
  nlohmann::json header;
  header["input_window"] = m.input_window;
  header["horizon"] = m.horizon;
  header["n_features"] = m.n_features;
  auto layers = nlohmann::json::array();
  for (const auto& l : m.temporal)
    layers.push_back({{"in", l.in_dim()},
                      {"out", l.out_dim()},
                      {"activation", activation_name(l.activation)}});
  header["temporal"] = layers;
  header["spatial"] = m.spatial.has_value();
  header["config"] = config;

  const std::string header_text = header.dump();
  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  append_u64_le(blob, header_text.size());
  blob += header_text;
  for (const auto& l : m.temporal) {
    append_f64_le(blob, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    append_f64_le(blob, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  if (m.spatial) {
    append_f64_le(blob, m.spatial->weight.data(),
                  static_cast<std::size_t>(m.spatial->weight.size()));
    append_f64_le(blob, m.spatial->bias.data(),
                  static_cast<std::size_t>(m.spatial->bias.size()));
  }
  write_file_atomic(path, blob);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string blob = read_file(path);
  if (blob.size() < sizeof(kMagic) + 8 ||
      std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
    throw ParseError("checkpoint: bad magic in " + path.string());
  const std::uint64_t header_len = read_u64_le(blob.data() + sizeof(kMagic));
  std::size_t pos = sizeof(kMagic) + 8;
  if (pos + header_len > blob.size())
    throw ParseError("checkpoint: truncated header in " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint: invalid header JSON: " + std::string(e.what()));
  }
  pos += header_len;

  Checkpoint ck;
  ck.model.input_window = header.at("input_window").get<Index>();
  ck.model.horizon = header.at("horizon").get<Index>();
  ck.model.n_features = header.at("n_features").get<Index>();
  if (header.contains("config"))
    ck.config = header.at("config").get<std::map<std::string, std::string>>();

  auto take = [&](Scalar* dst, std::size_t count) {
    if (pos + count * 8 > blob.size())
      throw ParseError("checkpoint: truncated buffers in " + path.string());
    read_f64_le(blob.data() + pos, dst, count);
    pos += count * 8;
  };

  for (const auto& jl : header.at("temporal")) {
    AffineLayer l;
    const Index in = jl.at("in").get<Index>();
    const Index out = jl.at("out").get<Index>();
    l.activation = activation_from(jl.at("activation").get<std::string>());
    l.weight.resize(out, in);
    l.bias.resize(out);
    take(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    take(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    ck.model.temporal.push_back(std::move(l));
  }
  if (header.at("spatial").get<bool>()) {
    AffineLayer s;
    const Index n = ck.model.n_features;
    s.weight.resize(n, n);
    s.bias.resize(n);
    take(s.weight.data(), static_cast<std::size_t>(s.weight.size()));
    take(s.bias.data(), static_cast<std::size_t>(s.bias.size()));
    ck.model.spatial = std::move(s);
  }
  if (pos != blob.size())
    throw ParseError("checkpoint: trailing bytes in " + path.string());
  ck.model.validate();
  return ck;
}

std::size_t checkpoint_value_count(const std::filesystem::path& path) {
  const std::string blob = read_file(path);
  if (blob.size() < sizeof(kMagic) + 8 ||
      std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
    throw ParseError("checkpoint: bad magic in " + path.string());
  const std::uint64_t header_len = read_u64_le(blob.data() + sizeof(kMagic));
  const std::size_t payload = blob.size() - sizeof(kMagic) - 8 - header_len;
  if (payload % 8 != 0)
    throw ParseError("checkpoint: buffer size not a multiple of 8");
  return payload / 8;
}

}  // namespace purets
