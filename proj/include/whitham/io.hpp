#pragma once

/// @file io.hpp
/// @brief Field CSV files, text output and content hashing.
///
/// Field CSVs start with a comment line carrying the grid:
///   # grid length=<L> points=<N>
/// followed by a header row and one row per sample.

#include <filesystem>
#include <string>
#include <vector>

#include "whitham/field.hpp"

namespace whitham::io {

void write_field_csv(const std::filesystem::path& path, const RealField& f);
void write_field_csv(const std::filesystem::path& path, const ComplexField& f);

/// Reads a real field written by write_field_csv (columns x,value).
RealField read_field_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Git blob hash: SHA-1 of "blob <size>\0" followed by the content, in hex.
std::string content_hash(const std::string& content);

/// Shortest decimal form that reads back to the same double.
std::string format_real(Real v);

}  // namespace whitham::io
