#pragma once

#include <filesystem>
#include <iosfwd>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/kruskal.hpp"

namespace tenkit {

/// Binary tensor file, magic "DTEN0001": after the magic come a u64
/// little-endian mode count, the extents as u64 little-endian, and the
/// entries as float64 little-endian in generalized column-major order.
/// No padding anywhere.
void write_tensor(std::ostream& os, const DenseTensor& t);
void write_tensor(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_tensor(std::istream& is);
DenseTensor read_tensor(const std::filesystem::path& path);

/// Model file, magic "DMOD0001" with the same header discipline: u64 mode
/// count, u64 rank, then one block per factor (u64 row count followed by the
/// column-major float64 entries) and finally the rank weights as float64.
void write_model(std::ostream& os, const KruskalModel& m);
void write_model(const std::filesystem::path& path, const KruskalModel& m);
KruskalModel read_model(std::istream& is);
KruskalModel read_model(const std::filesystem::path& path);

}  // namespace tenkit
