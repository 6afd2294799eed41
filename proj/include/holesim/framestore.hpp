#pragma once

#include "holesim/wavefunction.hpp"

#include <cstdint>
#include <fstream>
#include <string>

namespace holesim {

// Unreadable, corrupt, or truncated data file.  The CLI maps this to exit 3.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary frame-sequence file, little-endian:
//   "QHWF" | version u32 | points_per_axis u32 | x_min f64 | x_max f64 |
//   frame_count u32 | frame_dt f64 | symmetry u8 (0 fermionic, 1 bosonic)
// followed by frame_count frames of interleaved (re, im) f64, row-major
// (x1 index slow).  Frame k sits at time k * frame_dt.
struct FrameStoreHeader {
  std::uint32_t version = 1;
  std::uint32_t points_per_axis = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::uint32_t frame_count = 0;
  double frame_dt = 0.0;
  Symmetry symmetry = Symmetry::Fermionic;
};

class FrameStoreWriter {
 public:
  FrameStoreWriter(const std::string& path, const Grid2D& grid, Symmetry symmetry,
                   double frame_dt);
  ~FrameStoreWriter();
  FrameStoreWriter(const FrameStoreWriter&) = delete;
  FrameStoreWriter& operator=(const FrameStoreWriter&) = delete;

  void append(const CArray2D& amp);
  void close();  // patches frame_count into the header

 private:
  std::ofstream out_;
  std::string path_;
  std::uint32_t n_ = 0;
  std::uint32_t count_ = 0;
  bool open_ = false;
};

class FrameStoreReader {
 public:
  explicit FrameStoreReader(const std::string& path);

  const FrameStoreHeader& header() const { return header_; }
  // Spatial part of the stored grid (dt and frame_stride are not recorded;
  // dt is set to frame_dt and stride to 1).
  Grid2D grid() const;
  double frame_time(std::uint32_t k) const { return k * header_.frame_dt; }
  CArray2D frame(std::uint32_t k);

 private:
  std::ifstream in_;
  std::string path_;
  FrameStoreHeader header_;
  std::streamoff data_start_ = 0;
};

}  // namespace holesim
