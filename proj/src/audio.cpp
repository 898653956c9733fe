#include "vsd/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "vsd/fft.hpp"

namespace vsd::audio {

namespace {

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

AudioTrack read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path + ": cannot open");
    char tag[4];
    in.read(tag, 4);
    if (in.gcount() != 4 || std::memcmp(tag, "RIFF", 4) != 0)
        throw FormatError(path + ": not a RIFF file");
    read_u32(in);  // riff size
    in.read(tag, 4);
    if (in.gcount() != 4 || std::memcmp(tag, "WAVE", 4) != 0)
        throw FormatError(path + ": not a WAVE file");

    int audio_format = 0, channels = 0, bits = 0;
    int sample_rate = 0;
    std::vector<char> data;
    bool have_fmt = false, have_data = false;
    while (in.read(tag, 4)) {
        const std::uint32_t chunk_size = read_u32(in);
        if (!in) break;
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            audio_format = read_u16(in);
            channels = read_u16(in);
            sample_rate = static_cast<int>(read_u32(in));
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            bits = read_u16(in);
            if (chunk_size > 16)
                in.seekg(chunk_size - 16 + (chunk_size & 1), std::ios::cur);
            else if (chunk_size & 1)
                in.seekg(1, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(chunk_size);
            in.read(data.data(), chunk_size);
            if (in.gcount() != static_cast<std::streamsize>(chunk_size))
                throw FormatError(path + ": truncated data chunk");
            have_data = true;
            if (chunk_size & 1) in.seekg(1, std::ios::cur);
        } else {
            in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
    }
    if (!have_fmt || !have_data)
        throw FormatError(path + ": missing fmt or data chunk");
    if (channels <= 0 || sample_rate <= 0)
        throw FormatError(path + ": bad fmt chunk");

    const bool pcm16 = audio_format == 1 && bits == 16;
    const bool float32 = audio_format == 3 && bits == 32;
    if (!pcm16 && !float32)
        throw FormatError(path + ": unsupported format (need PCM16 or float32)");

    const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
    const std::size_t frame_bytes = bytes_per_sample * static_cast<std::size_t>(channels);
    const std::size_t n_frames = data.size() / frame_bytes;

    AudioTrack track;
    track.sample_rate = sample_rate;
    track.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const char* p = data.data() + i * frame_bytes + c * bytes_per_sample;
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
        track.samples[i] = acc / channels;
    }
    return track;
}

void write_wav(const std::string& path, const AudioTrack& track) {
    if (track.sample_rate <= 0)
        throw std::invalid_argument("write_wav: non-positive sample rate");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(track.samples.size() * 2);
    auto put_u32 = [&](std::uint32_t v) {
        char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
        out.write(b, 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
        out.write(b, 2);
    };
    out.write("RIFF", 4);
    put_u32(36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<std::uint32_t>(track.sample_rate));
    put_u32(static_cast<std::uint32_t>(track.sample_rate * 2));
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_bytes);
    for (double s : track.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const std::int16_t v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
        put_u16(static_cast<std::uint16_t>(v));
    }
    if (!out)
        throw FormatError(path + ": write failed");
}

long window_length(int sample_rate, double fps) {
    if (!(fps > 0.0))
        throw std::invalid_argument("window_length: fps must be positive");
    if (sample_rate <= 0)
        throw std::invalid_argument("window_length: non-positive sample rate");
    return std::lround(static_cast<double>(sample_rate) / fps);
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(int n_filters, std::size_t window_size,
                                                int sample_rate) {
    if (n_filters <= 0 || window_size < 2 || sample_rate <= 0)
        throw std::invalid_argument("mel_filterbank: bad parameters");
    const std::size_t n_bins = window_size / 2 + 1;
    const double nyquist = sample_rate / 2.0;
    // n_filters + 2 equally spaced mel points from 0 to Nyquist
    std::vector<double> edges_hz(n_filters + 2);
    const double mel_max = hz_to_mel(nyquist);
    for (int i = 0; i < n_filters + 2; ++i)
        edges_hz[i] = mel_to_hz(mel_max * i / (n_filters + 1));

    std::vector<std::vector<double>> fb(n_filters, std::vector<double>(n_bins, 0.0));
    for (int m = 0; m < n_filters; ++m) {
        const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate /
                             static_cast<double>(window_size);
            if (f > lo && f < mid)
                fb[m][k] = (f - lo) / (mid - lo);
            else if (f == mid)
                fb[m][k] = 1.0;
            else if (f > mid && f < hi)
                fb[m][k] = (hi - f) / (hi - mid);
        }
    }
    return fb;
}

std::vector<double> dct_ii_orthonormal(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
    const double scale = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m)
            acc += x[m] * std::cos(std::numbers::pi * static_cast<double>(j) *
                                   (static_cast<double>(m) + 0.5) / static_cast<double>(n));
        out[j] = (j == 0 ? scale0 : scale) * acc;
    }
    return out;
}

std::vector<double> dct_iii_orthonormal(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
    const double scale = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t m = 0; m < n; ++m) {
        double acc = scale0 * x[0];
        for (std::size_t j = 1; j < n; ++j)
            acc += scale * x[j] *
                   std::cos(std::numbers::pi * static_cast<double>(j) *
                            (static_cast<double>(m) + 0.5) / static_cast<double>(n));
        out[m] = acc;
    }
    return out;
}

namespace {

void check_config(const MfccConfig& config) {
    const int needed = config.n_coeffs + (config.include_c0 ? 0 : 1);
    if (config.n_coeffs <= 0 || config.n_mel_filters < needed)
        throw std::invalid_argument("MfccConfig: need n_mel_filters >= n_coeffs (+1 without c0)");
    if (!(config.log_floor > 0.0))
        throw std::invalid_argument("MfccConfig: log_floor must be positive");
}

std::vector<double> apply_window(const double* samples, std::size_t n,
                                 WindowFunction window) {
    std::vector<double> out(samples, samples + n);
    if (window == WindowFunction::Hann && n > 1) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(n - 1));
    }
    return out;
}

FeatureVector mfcc_window(const double* samples, std::size_t n, const fft::Dft& dft,
                          const std::vector<std::vector<double>>& fb,
                          const MfccConfig& config) {
    const std::vector<double> windowed = apply_window(samples, n, config.window);
    const auto spectrum = dft.forward_real(windowed);
    const std::size_t n_bins = n / 2 + 1;
    std::vector<double> power(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
        power[k] = std::norm(spectrum[k]);

    std::vector<double> log_energies(fb.size());
    for (std::size_t m = 0; m < fb.size(); ++m) {
        double e = 0.0;
        for (std::size_t k = 0; k < n_bins; ++k) e += fb[m][k] * power[k];
        log_energies[m] = std::log(std::max(e, config.log_floor));
    }

    const std::vector<double> cepstrum = dct_ii_orthonormal(log_energies);
    const std::size_t first = config.include_c0 ? 0 : 1;
    std::vector<double> coeffs(cepstrum.begin() + first,
                               cepstrum.begin() + first + config.n_coeffs);
    return FeatureVector(FeatureChannel::Audio, std::move(coeffs));
}

}  // namespace

FeatureVector mfcc_frame(const std::vector<double>& samples, int sample_rate,
                         const MfccConfig& config) {
    check_config(config);
    if (samples.size() < 2)
        throw std::invalid_argument("mfcc_frame: window shorter than 2 samples");
    if (sample_rate <= 0)
        throw std::invalid_argument("mfcc_frame: non-positive sample rate");
    const fft::Dft dft(samples.size());
    const auto fb = mel_filterbank(config.n_mel_filters, samples.size(), sample_rate);
    return mfcc_window(samples.data(), samples.size(), dft, fb, config);
}

std::vector<FeatureVector> mfcc_track(const AudioTrack& track, double fps,
                                      const MfccConfig& config) {
    check_config(config);
    const long window = window_length(track.sample_rate, fps);
    std::vector<FeatureVector> out;
    if (window < 2) return out;
    const std::size_t n_windows = track.samples.size() / static_cast<std::size_t>(window);
    if (n_windows == 0) return out;
    const fft::Dft dft(static_cast<std::size_t>(window));
    const auto fb =
        mel_filterbank(config.n_mel_filters, static_cast<std::size_t>(window),
                       track.sample_rate);
    out.reserve(n_windows);
    for (std::size_t i = 0; i < n_windows; ++i)
        out.push_back(mfcc_window(track.samples.data() + i * window,
                                  static_cast<std::size_t>(window), dft, fb, config));
    return out;
}

FeatureVector segment_audio_feature(const std::vector<FeatureVector>& frame_vectors,
                                    const Segment& segment) {
    const long lo = std::max(segment.start_frame, 0L);
    const long hi = std::min(segment.end_frame,
                             static_cast<long>(frame_vectors.size()));
    if (lo >= hi)
        throw std::invalid_argument("segment_audio_feature: no frame vectors in segment");
    std::vector<double> mean(frame_vectors[lo].values().size(), 0.0);
    for (long i = lo; i < hi; ++i) {
        const auto& v = frame_vectors[i].values();
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
    }
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (double& m : mean) m *= inv;
    return FeatureVector(FeatureChannel::Audio, std::move(mean));
}

}  // namespace vsd::audio
