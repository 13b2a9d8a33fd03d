#pragma once

// File formats
//
//   CSV matrix    one line per row, comma separated, '.' decimal, no header.
//   Binary matrix "BSMX" magic, u32 rows, u32 cols, rows*cols little-endian
//                 IEEE-754 doubles in row-major order.
//   Estimate JSON {"active_set": [...], "n_locations": S, "n_orient": O,
//                  "n_times": T, "blocks": {"<s>": [[...], ...]}}
//                 Each block is O rows of T values.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "bsmx/core.hpp"

namespace bsmx {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

Matrix read_matrix_csv(std::istream& is);
void write_matrix_csv(std::ostream& os, const Matrix& m);

Matrix read_matrix_binary(std::istream& is);
void write_matrix_binary(std::ostream& os, const Matrix& m);

/// Reads CSV or binary, chosen by the presence of the magic bytes.
Matrix read_matrix(const std::filesystem::path& path);
/// Writes binary for a `.bsmx` extension, CSV otherwise.
void write_matrix(const std::filesystem::path& path, const Matrix& m);

nlohmann::json estimate_to_json(const BlockSparseEstimate& est);
/// `n_locations` is used when the document does not carry the field.
BlockSparseEstimate estimate_from_json(const nlohmann::json& doc,
                                       std::optional<Index> n_locations = std::nullopt);

void write_estimate(const std::filesystem::path& path, const BlockSparseEstimate& est);
BlockSparseEstimate read_estimate(const std::filesystem::path& path,
                                  std::optional<Index> n_locations = std::nullopt);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace bsmx
