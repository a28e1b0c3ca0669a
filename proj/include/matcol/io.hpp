#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include <matcol/core.hpp>
#include <matcol/types.hpp>

namespace matcol {

// Headerless CSV of reals, one matrix row per line, 17 significant digits
// (lossless double round trip). Throws ParseError with the 1-based line and
// column of the first failure; non-finite values are rejected.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

// Binary format: magic "MCOL1", little-endian uint64 rows and cols, then
// row-major IEEE-754 doubles.
Matrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_binary(const std::filesystem::path& path, const Matrix& m);

// Dispatches on the MCOL1 magic, falling back to CSV.
Matrix read_matrix(const std::filesystem::path& path);

// Observation sets as JSON: {m, n, d, s, mode, full_columns: [{index,
// values}], partial_columns: [{index, rows, values}]}. Row multisets keep
// multiplicity; full columns appear in draw order, duplicates included.
ObservationSet read_observation_json(const std::filesystem::path& path);
void write_observation_json(const std::filesystem::path& path, const ObservationSet& obs);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

// Writes via a temporary file in the same directory plus rename, so readers
// never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace matcol
