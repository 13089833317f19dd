#pragma once

#include <string>
#include <vector>

#include "reverso/series.hpp"

namespace reverso {

// JSONL corpus: one object per line, {"id", "source", "length", "values"};
// missing values serialize as null and parse back to NaN.
void write_corpus_jsonl(const std::string& path, const std::vector<Series>& corpus);
std::vector<Series> read_corpus_jsonl(const std::string& path);

// Binary columnar corpus. Layout (little-endian):
//   magic "RVSC", u32 version (1), u64 series count,
//   per series: u32 id length + bytes, u32 source length + bytes,
//               u64 value count, packed float32 values (NaN = missing).
void write_corpus_binary(const std::string& path, const std::vector<Series>& corpus);
std::vector<Series> read_corpus_binary(const std::string& path);

// Single-series loader for CSV ("value" or "timestamp,value" columns, header
// optional) and JSONL (one number or one {"value": x} object per line, or a
// single corpus-style record). Empty/NaN/null entries become NaN.
std::vector<double> load_series_file(const std::string& path);

}  // namespace reverso
