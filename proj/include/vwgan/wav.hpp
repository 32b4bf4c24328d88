#pragma once

#include <cstdint>
#include <string>

#include "vwgan/audio.hpp"

namespace vwgan {

// RIFF/WAVE, PCM16 mono only; samples map as int16 / 32768.
AudioClip read_wav(const std::string& path);

// Writes PCM16 mono. Samples outside [-1, 1] are clamped; returns how many
// samples needed clamping.
int64_t write_wav(const std::string& path, const AudioClip& clip);

}  // namespace vwgan
