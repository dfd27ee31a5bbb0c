#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "roadnoise/audio_io.hpp"
#include "roadnoise/errors.hpp"
#include "roadnoise/rng.hpp"

using namespace roadnoise;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "roadnoise_audio_io_tests";
    fs::create_directories(dir);
    return dir;
}

void append_u32(std::vector<unsigned char>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<unsigned char>(x >> (8 * i)));
}
void append_u16(std::vector<unsigned char>& v, std::uint16_t x) {
    v.push_back(static_cast<unsigned char>(x & 0xff));
    v.push_back(static_cast<unsigned char>(x >> 8));
}
void append_tag(std::vector<unsigned char>& v, const char* t) {
    v.insert(v.end(), t, t + 4);
}

/// Hand-assembled PCM16 WAV, 1 or 2 channels, interleaved samples.
fs::path write_pcm16(const std::string& name, int rate, int channels,
                     const std::vector<std::int16_t>& interleaved,
                     std::uint16_t format_tag = 1, std::uint16_t bits = 16) {
    std::vector<unsigned char> v;
    append_tag(v, "RIFF");
    append_u32(v, 0);
    append_tag(v, "WAVE");
    append_tag(v, "fmt ");
    append_u32(v, 16);
    append_u16(v, format_tag);
    append_u16(v, static_cast<std::uint16_t>(channels));
    append_u32(v, static_cast<std::uint32_t>(rate));
    append_u32(v, static_cast<std::uint32_t>(rate * channels * 2));
    append_u16(v, static_cast<std::uint16_t>(channels * 2));
    append_u16(v, bits);
    append_tag(v, "data");
    append_u32(v, static_cast<std::uint32_t>(interleaved.size() * 2));
    for (std::int16_t s : interleaved)
        append_u16(v, static_cast<std::uint16_t>(s));
    const std::uint32_t riff = static_cast<std::uint32_t>(v.size() - 8);
    std::memcpy(v.data() + 4, &riff, 4);

    const fs::path path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size()));
    return path;
}

} // namespace

TEST_CASE("pcm16 samples scale by 1/32768") {
    const auto path = write_pcm16("pcm16_mono.wav", 8000, 1, {0, 16384, -32768});
    const AudioBuffer buf = read_wav(path);
    CHECK(buf.sample_rate_hz == 8000);
    REQUIRE(buf.samples.size() == 3);
    CHECK(buf.samples[0] == 0.0);
    CHECK(buf.samples[1] == 0.5);
    CHECK(buf.samples[2] == -1.0);
}

TEST_CASE("stereo downmix is the per-sample mean") {
    // pairs (0.25, 0.5) and (-0.5, 0.25) in exact pcm16 steps
    const auto path = write_pcm16("pcm16_stereo.wav", 16000, 2,
                                  {8192, 16384, -16384, 8192});
    const AudioBuffer buf = read_wav(path);
    REQUIRE(buf.samples.size() == 2);
    CHECK(buf.samples[0] == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(buf.samples[1] == doctest::Approx(-0.125).epsilon(1e-12));
}

TEST_CASE("downmix is channel-order independent") {
    const auto ab = write_pcm16("stereo_ab.wav", 16000, 2, {100, -700, 2500, 31000});
    const auto ba = write_pcm16("stereo_ba.wav", 16000, 2, {-700, 100, 31000, 2500});
    const AudioBuffer x = read_wav(ab);
    const AudioBuffer y = read_wav(ba);
    REQUIRE(x.samples.size() == y.samples.size());
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        CHECK(x.samples[i] == y.samples[i]);
}

TEST_CASE("float write/read round-trips bit-exactly") {
    Rng rng(2024);
    AudioBuffer buf;
    buf.sample_rate_hz = 16000;
    buf.samples.resize(4096);
    // float32-representable values, as any buffer read from disk would hold
    for (double& s : buf.samples)
        s = static_cast<double>(static_cast<float>(rng.uniform(-1.0, 1.0)));

    const fs::path path = temp_dir() / "roundtrip.wav";
    write_wav(buf, path);
    const AudioBuffer back = read_wav(path);
    CHECK(back.sample_rate_hz == buf.sample_rate_hz);
    REQUIRE(back.samples.size() == buf.samples.size());
    for (std::size_t i = 0; i < buf.samples.size(); ++i)
        CHECK(back.samples[i] == buf.samples[i]);
}

TEST_CASE("round-trip survives a second pass unchanged") {
    const auto path = write_pcm16("pcm16_chain.wav", 8000, 1,
                                  {3, -9, 12345, -23456, 32767});
    const AudioBuffer first = read_wav(path);
    const fs::path rewritten = temp_dir() / "chain2.wav";
    write_wav(first, rewritten);
    const AudioBuffer second = read_wav(rewritten);
    REQUIRE(second.samples.size() == first.samples.size());
    for (std::size_t i = 0; i < first.samples.size(); ++i)
        CHECK(second.samples[i] == first.samples[i]);
}

TEST_CASE("a buffer of zeros encodes as zero bytes") {
    AudioBuffer buf;
    buf.sample_rate_hz = 8000;
    buf.samples.assign(1000, 0.0);
    const fs::path path = temp_dir() / "zeros.wav";
    write_wav(buf, path);

    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    // find the data chunk and check its 4000-byte payload is all zero
    bool found = false;
    for (std::size_t i = 12; i + 8 < bytes.size();) {
        std::uint32_t size;
        std::memcpy(&size, bytes.data() + i + 4, 4);
        if (std::memcmp(bytes.data() + i, "data", 4) == 0) {
            REQUIRE(size == 4000);
            for (std::size_t k = 0; k < size; ++k) CHECK(bytes[i + 8 + k] == 0);
            found = true;
            break;
        }
        i += 8 + size + (size & 1);
    }
    CHECK(found);
}

TEST_CASE("error paths: missing, malformed, unsupported, empty") {
    CHECK_THROWS_AS(read_wav(temp_dir() / "does_not_exist.wav"), IoError);

    const fs::path garbage = temp_dir() / "garbage.wav";
    {
        std::ofstream out(garbage, std::ios::binary);
        out << "this is not a riff file at all";
    }
    CHECK_THROWS_AS(read_wav(garbage), FormatError);

    // mu-law format tag (7)
    const auto mulaw = write_pcm16("mulaw.wav", 8000, 1, {0, 0}, 7, 8);
    CHECK_THROWS_AS(read_wav(mulaw), UnsupportedCodecError);

    const auto empty = write_pcm16("empty.wav", 8000, 1, {});
    CHECK_THROWS_AS(read_wav(empty), EmptyInputError);

    AudioBuffer buf;
    buf.sample_rate_hz = 8000;
    buf.samples = {0.1, 0.2};
    CHECK_THROWS_AS(write_wav(buf, "/nonexistent_dir_zzz/out.wav"), IoError);
}

TEST_CASE("comment chunk survives and does not disturb samples") {
    AudioBuffer buf;
    buf.sample_rate_hz = 16000;
    buf.samples = {0.25, -0.5, 0.125};
    const fs::path path = temp_dir() / "comment.wav";
    write_wav(buf, path, "config_hash=deadbeef00000000");
    const AudioBuffer back = read_wav(path);
    REQUIRE(back.samples.size() == 3);
    CHECK(back.samples[0] == 0.25);
    CHECK(back.samples[1] == -0.5);
    CHECK(back.samples[2] == 0.125);
}
