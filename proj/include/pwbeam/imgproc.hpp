#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pwbeam/core.hpp"

// Ultrasound post-processing stages: Hilbert envelope, log compression and
// unit-range mapping. Each op has an explicit backward pass so the chain can
// sit inside a trained network; forward passes save exactly what the
// backward needs.

namespace pwbeam {

struct ProcessingConfig {
  double dynamic_range = 60.0;       // [dB]
  double log_floor_rel = 1e-10;      // floor as a fraction of e_max
  double envelope_floor_rel = 1e-10;

  void validate() const;
};

// ------------------------------------------------------------- envelope

struct EnvelopeSaved {
  Mat x;   // input
  Mat hx;  // columnwise Hilbert transform of the input
  Mat e;   // output envelope
};

// e = sqrt(x^2 + H(x)^2), H along depth (per column). Input stage=migrated.
BeamformedImage envelope(const BeamformedImage& img,
                         EnvelopeSaved* saved = nullptr);

// grad_in = (x g)/e^ - H((H(x) g)/e^), e^ = max(e, floor), using H^T = -H.
Mat envelope_backward(const Mat& grad_out, const EnvelopeSaved& saved,
                      const ProcessingConfig& cfg);

// ------------------------------------------------------------- log compress

struct LogSaved {
  Mat e;        // input envelope
  double e_max = 0.0;
  std::vector<std::uint8_t> active;  // 1 where neither floored nor clipped
};

// y = 20 log10(max(e, floor)/e_max) clipped to [-dynamic_range, 0];
// e_max is treated as a constant by the backward pass.
BeamformedImage log_compress(const BeamformedImage& img,
                             const ProcessingConfig& cfg,
                             LogSaved* saved = nullptr);

Mat log_compress_backward(const Mat& grad_out, const LogSaved& saved);

// ------------------------------------------------------------- unit range

// y = (x + dynamic_range)/dynamic_range in [0, 1]
BeamformedImage to_unit_range(const BeamformedImage& img,
                              const ProcessingConfig& cfg);

Mat to_unit_range_backward(const Mat& grad_out, const ProcessingConfig& cfg);

// ------------------------------------------------------------- helpers

// migrated -> envelope -> log_db -> normalized
BeamformedImage process_to_normalized(const BeamformedImage& migrated,
                                      const ProcessingConfig& cfg);

// Undo log compression + unit mapping: linear envelope scale relative to
// e_max = 1. Used for region statistics on the linear intensity scale.
Mat normalized_to_linear(const Mat& normalized, double dynamic_range);

// 8-bit binary PGM (P5), linear map of [0, 1].
void write_pgm(const BeamformedImage& img, const std::filesystem::path& path);

}  // namespace pwbeam
