#include "vwgan/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace vwgan {

namespace {

uint32_t get_u32(std::ifstream& f, const std::string& path) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw FormatError("truncated wav chunk in " + path);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t get_u16(std::ifstream& f, const std::string& path) {
  unsigned char b[2];
  f.read(reinterpret_cast<char*>(b), 2);
  if (!f) throw FormatError("truncated wav chunk in " + path);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void put_u32(std::ofstream& f, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  f.write(b, 4);
}

void put_u16(std::ofstream& f, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  f.write(b, 2);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open wav file: " + path);
  char tag[4];
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "RIFF", 4) != 0) throw FormatError("not a RIFF file: " + path);
  get_u32(f, path);  // riff size, unused
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "WAVE", 4) != 0) throw FormatError("not a WAVE file: " + path);

  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t rate = 0;
  AudioClip clip;
  bool have_data = false;

  while (f.peek() != EOF) {
    f.read(tag, 4);
    if (!f) break;
    uint32_t size = get_u32(f, path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too small in " + path);
      format = get_u16(f, path);
      channels = get_u16(f, path);
      rate = get_u32(f, path);
      get_u32(f, path);  // byte rate
      get_u16(f, path);  // block align
      bits = get_u16(f, path);
      f.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk in " + path);
      if (format != 1) throw FormatError("unsupported wav encoding (want PCM) in " + path);
      if (channels != 1) throw FormatError("unsupported channel count " +
                                           std::to_string(channels) + " (want mono) in " + path);
      if (bits != 16) throw FormatError("unsupported bit depth " + std::to_string(bits) +
                                        " (want 16) in " + path);
      if (size % 2 != 0) throw FormatError("odd data chunk size in " + path);
      size_t n = size / 2;
      std::vector<int16_t> raw(n);
      f.read(reinterpret_cast<char*>(raw.data()), size);
      if (!f) throw FormatError("truncated data chunk in " + path);
      clip.samples.resize(n);
      for (size_t i = 0; i < n; i++) clip.samples[i] = raw[i] / 32768.0;
      have_data = true;
    } else {
      f.seekg(size + (size & 1), std::ios::cur);
      if (!f) throw FormatError("truncated chunk '" + std::string(tag, 4) + "' in " + path);
    }
  }
  if (!have_fmt || !have_data) throw FormatError("missing fmt or data chunk in " + path);
  check_sample_rate(static_cast<int>(rate));
  clip.sample_rate = static_cast<int>(rate);
  return clip;
}

int64_t write_wav(const std::string& path, const AudioClip& clip) {
  check_sample_rate(clip.sample_rate);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open wav file for writing: " + path);
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_bytes = n * 2;
  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, 1);  // PCM
  put_u16(f, 1);  // mono
  put_u32(f, static_cast<uint32_t>(clip.sample_rate));
  put_u32(f, static_cast<uint32_t>(clip.sample_rate) * 2);
  put_u16(f, 2);
  put_u16(f, 16);
  f.write("data", 4);
  put_u32(f, data_bytes);

  int64_t clamped = 0;
  std::vector<int16_t> raw(n);
  for (uint32_t i = 0; i < n; i++) {
    const double s = clip.samples[i];
    if (s > 1.0 || s < -1.0) clamped++;
    double q = std::round(s * 32768.0);
    if (q > 32767.0) q = 32767.0;
    if (q < -32768.0) q = -32768.0;
    raw[i] = static_cast<int16_t>(q);
  }
  f.write(reinterpret_cast<const char*>(raw.data()), data_bytes);
  if (!f) throw IoError("failed writing wav file: " + path);
  return clamped;
}

}  // namespace vwgan
