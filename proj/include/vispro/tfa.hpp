#pragma once

// Time-frequency imaging of vibration snapshots: windowed FFT columns over
// a hopped tiling of the snapshot, magnitudes of the lowest frequency bins.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "vispro/common.hpp"
#include "vispro/fft.hpp"

namespace vispro {

// One burst of accelerometer samples with its wall-clock offset.
struct VibrationSnapshot {
    double timestamp = 0.0;    // seconds since run start
    double sample_rate = 0.0;  // Hz
    std::vector<double> samples;
};

enum class WindowKind { kHann, kRectangular };

struct StftConfig {
    int frame_length = 128;
    int hop = 38;
    int fft_size = 128;
    WindowKind window = WindowKind::kHann;
    int n_time_bins = 64;
    int n_freq_bins = 64;

    void validate() const {
        if (frame_length <= 0 || hop <= 0 || n_time_bins <= 0 || n_freq_bins <= 0) {
            throw UserError("stft config: all dimensions must be positive");
        }
        if (!is_power_of_two(static_cast<std::size_t>(fft_size)) || fft_size < frame_length) {
            throw UserError("stft config: fft_size must be a power of two >= frame_length");
        }
        if (n_freq_bins > fft_size / 2) {
            throw UserError("stft config: n_freq_bins exceeds fft_size/2");
        }
    }

    int required_samples() const { return (n_time_bins - 1) * hop + frame_length; }
};

// Row = frequency band (band 0 is DC), column = time window.
struct TfaImage {
    int rows = 0;
    int cols = 0;
    std::vector<float> values;  // row-major rows x cols
    float band_width_hz = 0.0f;
    std::vector<double> window_times;  // segment-center offsets, seconds
    double timestamp = 0.0;            // source snapshot timestamp

    float& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    float at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

inline std::vector<double> make_window(WindowKind kind, int length) {
    std::vector<double> w(static_cast<std::size_t>(length), 1.0);
    if (kind == WindowKind::kHann) {
        for (int n = 0; n < length; ++n) {
            w[n] = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / (length - 1)));
        }
    }
    return w;
}

inline TfaImage stft(const VibrationSnapshot& snapshot, const StftConfig& config) {
    config.validate();
    const int needed = config.required_samples();
    if (static_cast<int>(snapshot.samples.size()) < needed) {
        throw DataError("stft: snapshot at t=" + std::to_string(snapshot.timestamp) +
                        "s has " + std::to_string(snapshot.samples.size()) +
                        " samples, tiling needs " + std::to_string(needed));
    }

    TfaImage image;
    image.rows = config.n_freq_bins;
    image.cols = config.n_time_bins;
    image.values.assign(static_cast<std::size_t>(image.rows) * image.cols, 0.0f);
    image.band_width_hz = static_cast<float>(snapshot.sample_rate / config.fft_size);
    image.window_times.resize(config.n_time_bins);
    image.timestamp = snapshot.timestamp;

    const std::vector<double> window = make_window(config.window, config.frame_length);
    std::vector<Complex> frame(static_cast<std::size_t>(config.frame_length));

    for (int m = 0; m < config.n_time_bins; ++m) {
        const int start = m * config.hop;
        for (int n = 0; n < config.frame_length; ++n) {
            frame[n] = Complex{snapshot.samples[start + n] * window[n], 0.0};
        }
        const std::vector<Complex> spectrum =
            fft(frame, static_cast<std::size_t>(config.fft_size));
        for (int f = 0; f < config.n_freq_bins; ++f) {
            image.at(f, m) = static_cast<float>(std::abs(spectrum[f]));
        }
        image.window_times[m] =
            (start + config.frame_length / 2.0) / snapshot.sample_rate;
    }
    return image;
}

// log1p then per-image min-max rescale to [0,1]; a constant image maps to zeros.
inline TfaImage tfa_normalize(const TfaImage& image) {
    TfaImage out = image;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::vector<double> logged(image.values.size());
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        logged[i] = std::log1p(static_cast<double>(image.values[i]));
        lo = std::min(lo, logged[i]);
        hi = std::max(hi, logged[i]);
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < logged.size(); ++i) {
        out.values[i] =
            range > 0.0 ? static_cast<float>((logged[i] - lo) / range) : 0.0f;
    }
    return out;
}

// Flat binary image file: 8-byte magic, timestamp as f64 LE, then
// 64x64 f32 LE values in row-major order.
inline constexpr char kVtfaMagic[8] = {'V', 'T', 'F', 'A', '0', '0', '0', '1'};

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64_le(out, bits);
}

inline void put_f32_le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32_le(out, bits);
}

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    explicit ByteReader(const std::string& b) : buf(b) {}

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw FormatError("binary file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(u8()) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

inline void write_file_bytes(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace detail

inline std::string encode_vtfa(const TfaImage& image) {
    if (image.rows != 64 || image.cols != 64) {
        throw UserError("vtfa: image must be 64x64");
    }
    std::string out;
    out.reserve(8 + 8 + 64 * 64 * 4);
    out.append(kVtfaMagic, 8);
    detail::put_f64_le(out, image.timestamp);
    for (const float v : image.values) detail::put_f32_le(out, v);
    return out;
}

inline TfaImage decode_vtfa(const std::string& data) {
    detail::ByteReader reader(data);
    if (reader.bytes(8) != std::string(kVtfaMagic, 8)) {
        throw FormatError("vtfa: bad magic");
    }
    TfaImage image;
    image.rows = 64;
    image.cols = 64;
    image.timestamp = reader.f64();
    image.values.resize(64 * 64);
    for (float& v : image.values) v = reader.f32();
    return image;
}

inline void save_vtfa(const TfaImage& image, const std::string& path) {
    detail::write_file_bytes(path, encode_vtfa(image));
}

inline TfaImage load_vtfa(const std::string& path) {
    return decode_vtfa(detail::read_file_bytes(path));
}

}  // namespace vispro
