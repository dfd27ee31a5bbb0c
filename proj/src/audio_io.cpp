#include "roadnoise/audio_io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "roadnoise/errors.hpp"

namespace roadnoise {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatIeeeFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void append_tag(std::vector<unsigned char>& out, const char tag[4]) {
    out.insert(out.end(), tag, tag + 4);
}

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
};

} // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");

    std::vector<unsigned char> bytes(
        (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failure on '" + path.string() + "'");

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw FormatError("'" + path.string() + "' is not a RIFF/WAVE file");

    FmtChunk fmt;
    bool have_fmt = false;
    const unsigned char* data_ptr = nullptr;
    std::uint64_t data_size = 0;

    // Walk the chunk list; unknown chunks (LIST, fact, ...) are skipped.
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        const std::uint32_t chunk_size = read_u32(hdr + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size())
            throw FormatError("truncated chunk in '" + path.string() + "'");

        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16)
                throw FormatError("fmt chunk too small in '" + path.string() + "'");
            const unsigned char* f = bytes.data() + body;
            fmt.format = read_u16(f);
            fmt.channels = read_u16(f + 2);
            fmt.sample_rate = read_u32(f + 4);
            fmt.bits_per_sample = read_u16(f + 14);
            if (fmt.format == kFormatExtensible) {
                // Sub-format GUID starts with the 16-bit format code.
                if (chunk_size < 40)
                    throw FormatError("extensible fmt chunk too small");
                fmt.format = read_u16(f + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_ptr = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1); // chunks are word-aligned
    }

    if (!have_fmt)
        throw FormatError("missing fmt chunk in '" + path.string() + "'");
    if (data_ptr == nullptr)
        throw FormatError("missing data chunk in '" + path.string() + "'");
    if (data_size == 0)
        throw EmptyInputError("'" + path.string() + "' has an empty data chunk");
    if (fmt.channels != 1 && fmt.channels != 2)
        throw UnsupportedCodecError(
            std::to_string(fmt.channels) + " channels in '" + path.string() +
            "' (only mono/stereo supported)");
    if (fmt.sample_rate == 0)
        throw FormatError("zero sample rate in '" + path.string() + "'");

    const bool pcm16 = fmt.format == kFormatPcm && fmt.bits_per_sample == 16;
    const bool float32 = fmt.format == kFormatIeeeFloat && fmt.bits_per_sample == 32;
    if (!pcm16 && !float32)
        throw UnsupportedCodecError(
            "format tag " + std::to_string(fmt.format) + " at " +
            std::to_string(fmt.bits_per_sample) + " bits in '" + path.string() +
            "' (PCM16 and float32 supported)");

    const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
    const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
    if (data_size % frame_bytes != 0)
        throw FormatError("data chunk size is not a whole number of frames in '" +
                          path.string() + "'");
    const std::size_t frames = data_size / frame_bytes;

    AudioBuffer buffer;
    buffer.sample_rate_hz = static_cast<int>(fmt.sample_rate);
    buffer.samples.resize(frames);

    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < fmt.channels; ++c) {
            const unsigned char* p = data_ptr + (i * fmt.channels + c) * bytes_per_sample;
            if (pcm16) {
                std::int16_t v;
                std::memcpy(&v, p, 2);
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                acc += static_cast<double>(v);
            }
        }
        buffer.samples[i] = acc / fmt.channels;
    }

    for (double s : buffer.samples) {
        if (!std::isfinite(s))
            throw FormatError("non-finite sample in '" + path.string() + "'");
    }
    return buffer;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               const std::string& comment) {
    if (buffer.samples.empty())
        throw std::invalid_argument("refusing to write an empty buffer");
    if (buffer.sample_rate_hz <= 0)
        throw std::invalid_argument("sample rate must be positive");
    for (double s : buffer.samples) {
        if (!std::isfinite(s))
            throw std::invalid_argument("buffer contains non-finite sample");
    }

    const std::uint32_t n = static_cast<std::uint32_t>(buffer.samples.size());
    const std::uint32_t rate = static_cast<std::uint32_t>(buffer.sample_rate_hz);

    std::vector<unsigned char> out;
    out.reserve(64 + comment.size() + 4ull * n);

    append_tag(out, "RIFF");
    append_u32(out, 0); // patched below
    append_tag(out, "WAVE");

    // fmt: IEEE float, mono, 32-bit (cbSize = 0)
    append_tag(out, "fmt ");
    append_u32(out, 18);
    append_u16(out, kFormatIeeeFloat);
    append_u16(out, 1);
    append_u32(out, rate);
    append_u32(out, rate * 4);
    append_u16(out, 4);
    append_u16(out, 32);
    append_u16(out, 0);

    // fact chunk is expected for non-PCM formats
    append_tag(out, "fact");
    append_u32(out, 4);
    append_u32(out, n);

    if (!comment.empty()) {
        std::string text = comment;
        if (text.size() % 2 == 0) text.push_back('\0'); // keep ICMT odd so padded size is even
        append_tag(out, "LIST");
        append_u32(out, static_cast<std::uint32_t>(4 + 8 + text.size() + (text.size() & 1)));
        append_tag(out, "INFO");
        append_tag(out, "ICMT");
        append_u32(out, static_cast<std::uint32_t>(text.size()));
        out.insert(out.end(), text.begin(), text.end());
        if (text.size() & 1) out.push_back(0);
    }

    append_tag(out, "data");
    append_u32(out, 4 * n);
    for (double s : buffer.samples) {
        const float v = static_cast<float>(s);
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        append_u32(out, bits);
    }

    const std::uint32_t riff_size = static_cast<std::uint32_t>(out.size() - 8);
    out[4] = static_cast<unsigned char>(riff_size & 0xff);
    out[5] = static_cast<unsigned char>((riff_size >> 8) & 0xff);
    out[6] = static_cast<unsigned char>((riff_size >> 16) & 0xff);
    out[7] = static_cast<unsigned char>((riff_size >> 24) & 0xff);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f)
        throw IoError("write failure on '" + path.string() + "'");
}

} // namespace roadnoise
