#include "lpnet/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace lpnet {

namespace {

constexpr char kMagic[8] = {'L', 'P', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_array(std::ostream& os, const std::string& name, const Tensor& t) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
  for (int d : t.shape) put_u64(os, static_cast<std::uint64_t>(d));
  for (double v : t.data) put_f64(os, v);
}

std::pair<std::string, Tensor> get_array(std::istream& is) {
  const std::uint32_t name_len = get_u32(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  const std::uint32_t rank = get_u32(is);
  std::vector<int> shape(rank);
  for (std::uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(get_u64(is));
  Tensor t = Tensor::zeros(shape);
  for (double& v : t.data) v = get_f64(is);
  if (!is) throw Error("checkpoint: truncated array record '" + name + "'");
  return {std::move(name), std::move(t)};
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& meta, const AdaDelta* optimizer) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, 8);
  put_u32(os, kVersion);
  const std::string meta_str = meta.dump();
  put_u64(os, meta_str.size());
  os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  std::uint64_t count = static_cast<std::uint64_t>(params.size());
  if (optimizer) count += 2ull * static_cast<std::uint64_t>(params.size());
  put_u64(os, count);
  for (int i = 0; i < params.size(); ++i) put_array(os, "param." + params.name(i), params.tensor(i));
  if (optimizer) {
    for (int i = 0; i < params.size(); ++i)
      put_array(os, "opt.g2." + params.name(i), optimizer->grad_sq()[static_cast<std::size_t>(i)]);
    for (int i = 0; i < params.size(); ++i)
      put_array(os, "opt.dx2." + params.name(i),
                optimizer->delta_sq()[static_cast<std::size_t>(i)]);
  }
  if (!os) throw Error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("checkpoint: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw Error("checkpoint: bad magic in '" + path + "'");
  const std::uint32_t version = get_u32(is);
  if (version != kVersion)
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  const std::uint64_t meta_len = get_u64(is);
  std::string meta_str(meta_len, '\0');
  is.read(meta_str.data(), static_cast<std::streamsize>(meta_len));

  Checkpoint ckpt;
  ckpt.meta = nlohmann::json::parse(meta_str);

  const std::uint64_t count = get_u64(is);
  std::vector<std::pair<std::string, Tensor>> g2, dx2;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto [name, tensor] = get_array(is);
    if (name.rfind("param.", 0) == 0) {
      ckpt.params.add(name.substr(6), std::move(tensor));
    } else if (name.rfind("opt.g2.", 0) == 0) {
      g2.emplace_back(name.substr(7), std::move(tensor));
    } else if (name.rfind("opt.dx2.", 0) == 0) {
      dx2.emplace_back(name.substr(8), std::move(tensor));
    } else {
      throw Error("checkpoint: unexpected array '" + name + "'");
    }
  }
  if (!g2.empty()) {
    if (g2.size() != static_cast<std::size_t>(ckpt.params.size()) || g2.size() != dx2.size())
      throw Error("checkpoint: optimizer state does not match parameters");
    ckpt.opt_grad_sq.resize(g2.size());
    ckpt.opt_delta_sq.resize(dx2.size());
    for (auto& [name, tensor] : g2)
      ckpt.opt_grad_sq[static_cast<std::size_t>(ckpt.params.require(name))] = std::move(tensor);
    for (auto& [name, tensor] : dx2)
      ckpt.opt_delta_sq[static_cast<std::size_t>(ckpt.params.require(name))] = std::move(tensor);
  }
  return ckpt;
}

}  // namespace lpnet
