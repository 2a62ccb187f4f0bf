#include "incgraph/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "incgraph/errors.hpp"

namespace incgraph {

namespace fs = std::filesystem;

namespace {

const char* const kCanonicalHeader = "user_id,item_id,timestamp,u_attrs,i_attrs";

std::vector<std::string_view> split(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool try_parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void fail(const fs::path& file, std::size_t line_no,
                       const std::string& msg) {
  throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_field(std::string_view s, const fs::path& file, std::size_t line_no,
                   const char* what) {
  double v = 0.0;
  if (!try_parse_double(s, v)) {
    fail(file, line_no,
         std::string("cannot parse ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> parse_attr_list(std::string_view s, const fs::path& file,
                                    std::size_t line_no) {
  std::vector<double> out;
  s = trim(s);
  if (s.empty()) return out;
  for (auto part : split(s, ";")) out.push_back(parse_field(part, file, line_no, "attribute"));
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void check_widths(Dataset& data) {
  if (data.events.empty()) return;
  data.user_attr_width = data.events.front().user_attrs.size();
  data.item_attr_width = data.events.front().item_attrs.size();
  for (std::size_t k = 0; k < data.events.size(); ++k) {
    const auto& e = data.events[k];
    if (e.user_attrs.size() != data.user_attr_width ||
        e.item_attrs.size() != data.item_attr_width) {
      throw DataError("event " + std::to_string(k) +
                      ": attribute width differs from first event");
    }
  }
}

Dataset read_canonical_impl(std::istream& in, const fs::path& label) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return data;
  ++line_no;
  if (trim(line) != kCanonicalHeader) {
    fail(label, line_no, "expected header '" + std::string(kCanonicalHeader) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ",");
    if (fields.size() != 5) fail(label, line_no, "expected 5 fields");
    EventRecord e;
    e.user_id = std::string(trim(fields[0]));
    e.item_id = std::string(trim(fields[1]));
    e.timestamp = parse_field(fields[2], label, line_no, "timestamp");
    e.user_attrs = parse_attr_list(fields[3], label, line_no);
    e.item_attrs = parse_attr_list(fields[4], label, line_no);
    data.events.push_back(std::move(e));
  }
  check_widths(data);
  return data;
}

Dataset read_generic(const fs::path& path, const ConvertOptions& opts) {
  auto in = open_input(path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  const std::size_t want = 3 + opts.user_attr_cols + opts.item_attr_cols;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ",");
    double ts = 0.0;
    if (line_no == 1 && fields.size() >= 3 && !try_parse_double(fields[2], ts)) {
      continue;  // header row
    }
    if (fields.size() != want) {
      fail(path, line_no,
           "expected " + std::to_string(want) + " fields, found " +
               std::to_string(fields.size()) +
               " (set user/item attribute column counts)");
    }
    EventRecord e;
    e.user_id = std::string(trim(fields[0]));
    e.item_id = std::string(trim(fields[1]));
    e.timestamp = parse_field(fields[2], path, line_no, "timestamp");
    for (std::size_t c = 0; c < opts.user_attr_cols; ++c)
      e.user_attrs.push_back(parse_field(fields[3 + c], path, line_no, "attribute"));
    for (std::size_t c = 0; c < opts.item_attr_cols; ++c)
      e.item_attrs.push_back(parse_field(fields[3 + opts.user_attr_cols + c], path,
                                         line_no, "attribute"));
    data.events.push_back(std::move(e));
  }
  return data;
}

Dataset read_jodie(const fs::path& path) {
  auto in = open_input(path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ",");
    double ts = 0.0;
    if (line_no == 1 && (fields.size() < 3 || !try_parse_double(fields[2], ts))) {
      continue;  // header row
    }
    if (fields.size() < 3) fail(path, line_no, "expected at least 3 fields");
    EventRecord e;
    e.user_id = std::string(trim(fields[0]));
    e.item_id = std::string(trim(fields[1]));
    e.timestamp = parse_field(fields[2], path, line_no, "timestamp");
    data.events.push_back(std::move(e));
  }
  return data;
}

// One-hot position of `value` within the sorted category list.
std::vector<double> one_hot(const std::vector<std::string>& cats,
                            const std::string& value) {
  std::vector<double> v(cats.size(), 0.0);
  auto it = std::lower_bound(cats.begin(), cats.end(), value);
  if (it != cats.end() && *it == value) v[static_cast<std::size_t>(it - cats.begin())] = 1.0;
  return v;
}

using AttrTable = std::unordered_map<std::string, std::vector<double>>;

// u.user: id|age|gender|occupation|zip. Encoded as gender one-hot (F, M),
// age min-max scaled, occupation one-hot over the categories present.
AttrTable read_ml100k_users(const fs::path& path) {
  auto in = open_input(path);
  struct Row { std::string id; double age; std::string gender, occ; };
  std::vector<Row> rows;
  std::set<std::string> genders, occs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(line, "|");
    if (f.size() < 4) fail(path, line_no, "expected id|age|gender|occupation|zip");
    Row r{std::string(trim(f[0])), parse_field(f[1], path, line_no, "age"),
          std::string(trim(f[2])), std::string(trim(f[3]))};
    genders.insert(r.gender);
    occs.insert(r.occ);
    rows.push_back(std::move(r));
  }
  double lo = 0.0, hi = 0.0;
  if (!rows.empty()) {
    lo = hi = rows.front().age;
    for (const auto& r : rows) { lo = std::min(lo, r.age); hi = std::max(hi, r.age); }
  }
  const std::vector<std::string> gcat(genders.begin(), genders.end());
  const std::vector<std::string> ocat(occs.begin(), occs.end());
  AttrTable out;
  for (const auto& r : rows) {
    std::vector<double> v = one_hot(gcat, r.gender);
    v.push_back(hi > lo ? (r.age - lo) / (hi - lo) : 0.0);
    auto o = one_hot(ocat, r.occ);
    v.insert(v.end(), o.begin(), o.end());
    out[r.id] = std::move(v);
  }
  return out;
}

// u.item: id|title|release|video release|url|19 genre flags.
AttrTable read_ml100k_items(const fs::path& path) {
  auto in = open_input(path);
  AttrTable out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(line, "|");
    if (f.size() < 6) fail(path, line_no, "expected genre flag columns");
    const std::size_t genres = f.size() - 5;
    std::vector<double> v;
    for (std::size_t g = 0; g < genres; ++g)
      v.push_back(parse_field(f[5 + g], path, line_no, "genre flag"));
    out[std::string(trim(f[0]))] = std::move(v);
  }
  return out;
}

// users.dat: UserID::Gender::Age::Occupation::Zip. Gender, age bucket and
// occupation code are all categorical and one-hot encoded.
AttrTable read_ml1m_users(const fs::path& path) {
  auto in = open_input(path);
  struct Row { std::string id, gender, age, occ; };
  std::vector<Row> rows;
  std::set<std::string> genders, ages, occs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(line, "::");
    if (f.size() < 4) fail(path, line_no, "expected UserID::Gender::Age::Occupation");
    Row r{std::string(trim(f[0])), std::string(trim(f[1])),
          std::string(trim(f[2])), std::string(trim(f[3]))};
    genders.insert(r.gender);
    ages.insert(r.age);
    occs.insert(r.occ);
    rows.push_back(std::move(r));
  }
  const std::vector<std::string> gcat(genders.begin(), genders.end());
  const std::vector<std::string> acat(ages.begin(), ages.end());
  const std::vector<std::string> ocat(occs.begin(), occs.end());
  AttrTable out;
  for (const auto& r : rows) {
    std::vector<double> v = one_hot(gcat, r.gender);
    auto a = one_hot(acat, r.age);
    auto o = one_hot(ocat, r.occ);
    v.insert(v.end(), a.begin(), a.end());
    v.insert(v.end(), o.begin(), o.end());
    out[r.id] = std::move(v);
  }
  return out;
}

// movies.dat: MovieID::Title::Genre|Genre|...  -> multi-hot over 18 genres.
AttrTable read_ml1m_items(const fs::path& path) {
  static const std::vector<std::string> kGenres = {
      "Action",  "Adventure", "Animation", "Children's", "Comedy",
      "Crime",   "Documentary", "Drama",  "Fantasy",    "Film-Noir",
      "Horror",  "Musical",   "Mystery",  "Romance",    "Sci-Fi",
      "Thriller", "War",      "Western"};
  auto in = open_input(path);
  AttrTable out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(line, "::");
    if (f.size() < 3) fail(path, line_no, "expected MovieID::Title::Genres");
    std::vector<double> v(kGenres.size(), 0.0);
    for (auto g : split(trim(f[2]), "|")) {
      auto it = std::find(kGenres.begin(), kGenres.end(), std::string(g));
      if (it != kGenres.end()) v[static_cast<std::size_t>(it - kGenres.begin())] = 1.0;
    }
    out[std::string(trim(f[0]))] = std::move(v);
  }
  return out;
}

void attach_attributes(Dataset& data, const AttrTable& users,
                       const AttrTable& items) {
  std::size_t p = users.empty() ? 0 : users.begin()->second.size();
  std::size_t q = items.empty() ? 0 : items.begin()->second.size();
  for (auto& e : data.events) {
    auto u = users.find(e.user_id);
    e.user_attrs = u != users.end() ? u->second : std::vector<double>(p, 0.0);
    auto i = items.find(e.item_id);
    e.item_attrs = i != items.end() ? i->second : std::vector<double>(q, 0.0);
  }
}

Dataset read_movielens(const fs::path& path, const ConvertOptions& opts,
                       bool one_m) {
  auto in = open_input(path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  const std::string_view sep = one_m ? "::" : "\t";
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(line, sep);
    if (f.size() < 4) fail(path, line_no, "expected user, item, rating, timestamp");
    EventRecord e;
    e.user_id = std::string(trim(f[0]));
    e.item_id = std::string(trim(f[1]));
    e.timestamp = parse_field(f[3], path, line_no, "timestamp");
    data.events.push_back(std::move(e));
  }
  if (opts.with_attributes) {
    const fs::path dir = path.parent_path();
    const fs::path users = dir / (one_m ? "users.dat" : "u.user");
    const fs::path items = dir / (one_m ? "movies.dat" : "u.item");
    if (fs::exists(users) && fs::exists(items)) {
      attach_attributes(data, one_m ? read_ml1m_users(users) : read_ml100k_users(users),
                        one_m ? read_ml1m_items(items) : read_ml100k_items(items));
    }
  }
  return data;
}

void filter_rare_items(Dataset& data, std::size_t min_count) {
  if (min_count <= 1) return;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& e : data.events) ++counts[e.item_id];
  std::erase_if(data.events, [&](const EventRecord& e) {
    return counts[e.item_id] < min_count;
  });
}

std::string join_attrs(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ';';
    out += format_double(v[k]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InputError("format_double: conversion failed");
  return std::string(buf, ptr);
}

SourceFormat parse_source_format(const std::string& name) {
  static const std::map<std::string, SourceFormat> kNames = {
      {"canonical", SourceFormat::Canonical},
      {"generic", SourceFormat::Generic},
      {"movielens-100k", SourceFormat::MovieLens100K},
      {"movielens-1m", SourceFormat::MovieLens1M},
      {"jodie", SourceFormat::Jodie},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) {
    throw ConfigError("unknown format '" + name +
                      "' (canonical, generic, movielens-100k, movielens-1m, jodie)");
  }
  return it->second;
}

void sort_events(std::vector<EventRecord>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
}

Dataset convert(const fs::path& input, const ConvertOptions& opts) {
  Dataset data;
  switch (opts.format) {
    case SourceFormat::Canonical: data = read_canonical(input); break;
    case SourceFormat::Generic: data = read_generic(input, opts); break;
    case SourceFormat::MovieLens100K: data = read_movielens(input, opts, false); break;
    case SourceFormat::MovieLens1M: data = read_movielens(input, opts, true); break;
    case SourceFormat::Jodie: data = read_jodie(input); break;
  }
  filter_rare_items(data, opts.min_item_interactions);
  sort_events(data.events);
  check_widths(data);
  return data;
}

Dataset read_canonical(std::istream& in) { return read_canonical_impl(in, "<stream>"); }

Dataset read_canonical(const fs::path& path) {
  auto in = open_input(path);
  return read_canonical_impl(in, path);
}

void write_canonical(std::ostream& out, const Dataset& data) {
  out << kCanonicalHeader << '\n';
  for (const auto& e : data.events) {
    out << e.user_id << ',' << e.item_id << ',' << format_double(e.timestamp) << ','
        << join_attrs(e.user_attrs) << ',' << join_attrs(e.item_attrs) << '\n';
  }
}

void write_canonical(const fs::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_canonical(out, data);
}

}  // namespace incgraph
