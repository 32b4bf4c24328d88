#include "vwgan/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "vwgan/errors.hpp"

namespace vwgan {

const Tensor& Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint has no tensor named '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

namespace {

void put_u32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t get_u32(std::ifstream& f, const std::string& path) {
  uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 4);
  if (!f) throw FormatError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::string& config_text,
                      const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write("VWG1", 4);
  put_u32(f, static_cast<uint32_t>(config_text.size()));
  f.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
  put_u32(f, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_u32(f, static_cast<uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(f, static_cast<uint32_t>(t->rank()));
    for (int d : t->shape) put_u32(f, static_cast<uint32_t>(d));
    f.write(reinterpret_cast<const char*>(t->ptr()),
            static_cast<std::streamsize>(t->numel() * sizeof(double)));
  }
  if (!f) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "VWG1", 4) != 0)
    throw FormatError("bad checkpoint magic in " + path);
  Checkpoint ck;
  uint32_t config_len = get_u32(f, path);
  ck.config_text.resize(config_len);
  f.read(ck.config_text.data(), config_len);
  if (!f) throw FormatError("truncated checkpoint: " + path);
  uint32_t n_tensors = get_u32(f, path);
  ck.tensors.reserve(n_tensors);
  for (uint32_t i = 0; i < n_tensors; i++) {
    uint32_t name_len = get_u32(f, path);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    if (!f) throw FormatError("truncated checkpoint: " + path);
    uint32_t rank = get_u32(f, path);
    if (rank > 8) throw FormatError("checkpoint tensor '" + name + "' has absurd rank");
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; d++) {
      uint32_t dim = get_u32(f, path);
      if (dim == 0) throw FormatError("checkpoint tensor '" + name + "' has a zero dimension");
      shape[d] = static_cast<int>(dim);
    }
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.ptr()),
           static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!f) throw FormatError("truncated checkpoint: " + path);
    ck.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ck;
}

}  // namespace vwgan
