#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "randfield/paths.hpp"

namespace randfield {

// Locale-independent, lossless double formatting (%.17g); CSV bodies must be
// byte-identical across reruns and thread counts.
std::string format_double(double v);

// FNV-1a 64-bit, hex-encoded; used for config hashes and output checksums.
std::string fnv1a_hex(const std::string& bytes);
std::string fnv1a_file_hex(const std::string& path);

// One row per (member, grid time): neuron_id, r_1..r_d, t, x.
// time_stride keeps every k-th grid point (the last point is always kept);
// member_stride likewise for members.
void write_ensemble_csv(const std::string& path, const Ensemble& ensemble, int time_stride = 1,
                        int member_stride = 1);

// Reads an ensemble written by write_ensemble_csv (full time resolution
// only) and reconstructs its grid from the time column.
Ensemble read_ensemble_csv(const std::string& path);

// Compact binary ensemble format (for large runs): little-endian, header
// "RFE1" + u32 dim + u64 n_members + u64 n_hist + u64 n_main + f64 dt,
// then per member f64 r[dim] followed by f64 values[n_hist+n_main+1].
void write_ensemble_bin(const std::string& path, const Ensemble& ensemble);
Ensemble read_ensemble_bin(const std::string& path);

// Dispatches on the RFE1 magic, falling back to CSV.
Ensemble read_ensemble_any(const std::string& path);

void write_text_file(const std::string& path, const std::string& body);
std::string read_text_file(const std::string& path);

}  // namespace randfield
