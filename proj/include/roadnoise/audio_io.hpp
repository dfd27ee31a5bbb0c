#pragma once

#include <filesystem>
#include <string>

#include "roadnoise/audio_buffer.hpp"

namespace roadnoise {

/// Read a RIFF/WAVE file into the canonical form.
///
/// Accepted encodings: PCM 16-bit integer and IEEE float 32-bit, one or
/// two channels. Stereo is downmixed by per-sample arithmetic mean.
/// Integer samples are scaled to [-1, 1] by dividing by 32768.
///
/// Throws FormatError (malformed container), UnsupportedCodecError
/// (anything else, e.g. mu-law or 24-bit PCM), EmptyInputError (zero-byte
/// data chunk), IoError (unreadable path).
AudioBuffer read_wav(const std::filesystem::path& path);

/// Write a 32-bit float mono WAV. read_wav on the result reproduces the
/// samples bit-exactly whenever they are representable as float32 (always
/// true for buffers that came from read_wav). An optional comment is
/// stored in a LIST/INFO chunk; readers that don't care skip it.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               const std::string& comment = {});

} // namespace roadnoise
