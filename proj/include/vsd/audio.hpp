#pragma once

#include <string>
#include <vector>

#include "vsd/core.hpp"

namespace vsd::audio {

// Mono PCM track, samples in [-1, 1].
struct AudioTrack {
    int sample_rate = 0;
    std::vector<double> samples;
};

// WAV, PCM 16-bit or 32-bit float, little-endian; stereo (and any multi-
// channel) input is downmixed to mono by channel mean.
AudioTrack read_wav(const std::string& path);

// PCM 16-bit mono writer, used by tooling and fixtures.
void write_wav(const std::string& path, const AudioTrack& track);

enum class WindowFunction { Rectangular, Hann };

struct MfccConfig {
    int n_coeffs = 22;
    int n_mel_filters = 26;
    bool include_c0 = false;
    double log_floor = 1e-10;
    WindowFunction window = WindowFunction::Hann;
};

// Audio samples per video frame: round(sample_rate / fps).
long window_length(int sample_rate, double fps);

// MFCC of one window: window function, DFT power spectrum, triangular mel
// filterbank (HTK scale, 0..Nyquist), log with floor, orthonormal DCT-II.
// Returns c1..c22 by default (c0 excluded).
FeatureVector mfcc_frame(const std::vector<double>& samples, int sample_rate,
                         const MfccConfig& config = {});

// One MFCC vector per video frame over consecutive non-overlapping windows of
// window_length(sample_rate, fps); the trailing partial window is dropped.
std::vector<FeatureVector> mfcc_track(const AudioTrack& track, double fps,
                                      const MfccConfig& config = {});

// Element-wise mean of the segment's per-frame vectors.
FeatureVector segment_audio_feature(const std::vector<FeatureVector>& frame_vectors,
                                    const Segment& segment);

// Building blocks, exposed so tests can pin them independently.
double hz_to_mel(double hz);
double mel_to_hz(double mel);
std::vector<std::vector<double>> mel_filterbank(int n_filters, std::size_t window_size,
                                                int sample_rate);
std::vector<double> dct_ii_orthonormal(const std::vector<double>& x);
std::vector<double> dct_iii_orthonormal(const std::vector<double>& x);

}  // namespace vsd::audio
