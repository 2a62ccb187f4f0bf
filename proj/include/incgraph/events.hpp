#pragma once

// Interaction records, the canonical event CSV and converters from common
// public dataset layouts.
//
// Canonical file:
//   user_id,item_id,timestamp,u_attrs,i_attrs
//   42,7,1.5,0;1,0.25
// Attributes are semicolon-joined reals (empty when absent); rows are sorted
// by timestamp ascending, stable for ties.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace incgraph {

struct EventRecord {
  std::string user_id;
  std::string item_id;
  double timestamp = 0.0;
  std::vector<double> user_attrs;
  std::vector<double> item_attrs;
};

struct Dataset {
  std::vector<EventRecord> events;
  std::size_t user_attr_width = 0;
  std::size_t item_attr_width = 0;
};

enum class SourceFormat {
  Canonical,
  Generic,        // user_id,item_id,timestamp[,u_attr...][,i_attr...]
  MovieLens100K,  // u.data (+ u.user, u.item side files)
  MovieLens1M,    // ratings.dat (+ users.dat, movies.dat side files)
  Jodie,          // user_id,item_id,timestamp,state_label,features...
};

SourceFormat parse_source_format(const std::string& name);

struct ConvertOptions {
  SourceFormat format = SourceFormat::Generic;
  std::size_t user_attr_cols = 0;   // generic only
  std::size_t item_attr_cols = 0;   // generic only
  bool with_attributes = true;      // MovieLens side files
  std::size_t min_item_interactions = 1;
};

/// Parses `input` and returns events sorted by timestamp (stable).
/// Throws DataError with the offending line number on malformed rows.
Dataset convert(const std::filesystem::path& input, const ConvertOptions& opts);

Dataset read_canonical(std::istream& in);
Dataset read_canonical(const std::filesystem::path& path);
void write_canonical(std::ostream& out, const Dataset& data);
void write_canonical(const std::filesystem::path& path, const Dataset& data);

/// Stable chronological sort.
void sort_events(std::vector<EventRecord>& events);

/// Shortest representation that round-trips through strtod.
std::string format_double(double v);

}  // namespace incgraph
