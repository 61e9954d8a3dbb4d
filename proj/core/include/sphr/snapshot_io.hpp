#pragma once

#include "sphr/particles.hpp"

#include <filesystem>
#include <iosfwd>

namespace sphr {

/// Binary columnar snapshot format, little-endian:
///
///   magic "SPHR" | u32 version | u64 n | f64 t | u64 step
///   u32 attribute count | per attribute: u32 name length, name bytes
///   arrays, each n contiguous f64 values (3n for vectors), in order:
///       id, mass, position, velocity, density, pressure, attributes
///   u32 CRC-32 of everything before it
///
/// Writing then reading reproduces the particle state bit for bit.
void write_snapshot(const std::filesystem::path& file, const Snapshot& snapshot);

/// Throws IoError on missing files, bad magic/version, truncation, or
/// checksum mismatch.
Snapshot read_snapshot(const std::filesystem::path& file);

/// Text export: a header row, then one comma-separated particle per row with
/// round-trip (17 significant digit) formatting.
void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot);
void write_snapshot_csv(const std::filesystem::path& file, const Snapshot& snapshot);

} // namespace sphr
