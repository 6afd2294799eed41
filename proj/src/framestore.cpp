#include "holesim/framestore.hpp"

#include <cstring>

namespace holesim {

namespace {

constexpr char kMagic[4] = {'Q', 'H', 'W', 'F'};
constexpr std::uint32_t kVersion = 1;
// magic + version + points + x_min + x_max + count + frame_dt + symmetry
constexpr std::streamoff kHeaderBytes = 4 + 4 + 4 + 8 + 8 + 4 + 8 + 1;
constexpr std::streamoff kCountOffset = 4 + 4 + 4 + 8 + 8;

// This format is little-endian by contract; raw writes are fine on the x86-64
// targets this builds for.
template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  return value;
}

}  // namespace

FrameStoreWriter::FrameStoreWriter(const std::string& path, const Grid2D& grid, Symmetry symmetry,
                                   double frame_dt)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), n_(grid.points_per_axis) {
  if (!out_) throw data_error("frame store: cannot open '" + path + "' for writing");
  out_.write(kMagic, 4);
  put<std::uint32_t>(out_, kVersion);
  put<std::uint32_t>(out_, n_);
  put<double>(out_, grid.x_min);
  put<double>(out_, grid.x_max);
  put<std::uint32_t>(out_, 0);  // frame_count, patched on close
  put<double>(out_, frame_dt);
  put<std::uint8_t>(out_, symmetry == Symmetry::Fermionic ? 0 : 1);
  if (!out_) throw data_error("frame store: header write to '" + path + "' failed");
  open_ = true;
}

FrameStoreWriter::~FrameStoreWriter() {
  try {
    close();
  } catch (...) {
  }
}

void FrameStoreWriter::append(const CArray2D& amp) {
  if (!open_) throw data_error("frame store: writer already closed");
  if (amp.rows() != n_ || amp.cols() != n_)
    throw std::invalid_argument("frame store: frame shape mismatch");
  // std::complex<double> is layout-compatible with (re, im) f64 pairs, and the
  // array is row-major, so the buffer already matches the file layout.
  out_.write(reinterpret_cast<const char*>(amp.data()),
             static_cast<std::streamsize>(sizeof(Complex)) * n_ * n_);
  if (!out_) throw data_error("frame store: frame write to '" + path_ + "' failed");
  ++count_;
}

void FrameStoreWriter::close() {
  if (!open_) return;
  open_ = false;
  out_.seekp(kCountOffset);
  put<std::uint32_t>(out_, count_);
  out_.close();
  if (!out_) throw data_error("frame store: finalizing '" + path_ + "' failed");
}

FrameStoreReader::FrameStoreReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw data_error("frame store: cannot open '" + path + "'");
  char magic[4];
  in_.read(magic, 4);
  if (!in_ || std::memcmp(magic, kMagic, 4) != 0)
    throw data_error("frame store: '" + path + "' is not a QHWF file");
  header_.version = get<std::uint32_t>(in_);
  if (header_.version != kVersion)
    throw data_error("frame store: '" + path + "' has unsupported version " +
                     std::to_string(header_.version));
  header_.points_per_axis = get<std::uint32_t>(in_);
  header_.x_min = get<double>(in_);
  header_.x_max = get<double>(in_);
  header_.frame_count = get<std::uint32_t>(in_);
  header_.frame_dt = get<double>(in_);
  header_.symmetry = get<std::uint8_t>(in_) == 0 ? Symmetry::Fermionic : Symmetry::Bosonic;
  if (!in_) throw data_error("frame store: '" + path + "' has a truncated header");
  data_start_ = kHeaderBytes;

  in_.seekg(0, std::ios::end);
  const std::streamoff size = in_.tellg();
  const std::streamoff frame_bytes =
      static_cast<std::streamoff>(sizeof(Complex)) * header_.points_per_axis *
      header_.points_per_axis;
  if (header_.points_per_axis == 0 ||
      size != data_start_ + frame_bytes * static_cast<std::streamoff>(header_.frame_count))
    throw data_error("frame store: '" + path + "' is truncated or inconsistent");
}

Grid2D FrameStoreReader::grid() const {
  Grid2D g;
  g.x_min = header_.x_min;
  g.x_max = header_.x_max;
  g.points_per_axis = static_cast<int>(header_.points_per_axis);
  g.dt = header_.frame_dt;
  g.frame_stride = 1;
  return g;
}

CArray2D FrameStoreReader::frame(std::uint32_t k) {
  if (k >= header_.frame_count)
    throw std::out_of_range("frame store: frame index out of range");
  const std::streamoff frame_bytes =
      static_cast<std::streamoff>(sizeof(Complex)) * header_.points_per_axis *
      header_.points_per_axis;
  in_.seekg(data_start_ + frame_bytes * static_cast<std::streamoff>(k));
  CArray2D amp(header_.points_per_axis, header_.points_per_axis);
  in_.read(reinterpret_cast<char*>(amp.data()), frame_bytes);
  if (!in_) throw data_error("frame store: read from '" + path_ + "' failed");
  return amp;
}

}  // namespace holesim
