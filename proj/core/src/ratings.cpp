#include "lmlcc/ingest/ratings.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/text.hpp"

namespace lmlcc {

std::vector<NoduleRecord> parse_ratings(const std::string& csv_text) {
  std::vector<NoduleRecord> out;
  std::unordered_set<std::string> seen;
  const auto lines = text::split(csv_text, '\n');
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const std::string where = "ratings CSV line " + std::to_string(line_no);
    if (!header_seen) {
      if (line != kRatingsHeader) {
        throw ParseError(where + ": expected header '" + std::string(kRatingsHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 7) {
      throw ParseError(where + ": expected 7 fields, found " + std::to_string(f.size()));
    }
    NoduleRecord r;
    r.series_id = std::string(text::trim(f[0]));
    r.nodule_id = std::string(text::trim(f[1]));
    if (r.nodule_id.empty()) throw ParseError(where + ": empty nodule_id");
    try {
      for (int a = 0; a < 3; ++a) r.center_world[a] = text::parse_double(f[2 + a], "coordinate");
      r.diameter_mm = text::parse_double(f[5], "diameter_mm");
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!(r.diameter_mm > 0.0)) throw ValidationError(where + ": diameter_mm must be positive");
    const auto ratings_field = text::trim(f[6]);
    if (!ratings_field.empty()) {
      for (const auto& tok : text::split(ratings_field, '|')) {
        long long v = 0;
        try {
          v = text::parse_int(tok, "rating");
        } catch (const ParseError& e) {
          throw ParseError(where + ": " + e.what());
        }
        if (v < 1 || v > 5) {
          throw ValidationError(where + ": rating " + std::to_string(v) + " outside 1..5");
        }
        r.ratings.push_back(static_cast<int>(v));
      }
      if (r.ratings.size() > 4) {
        throw ValidationError(where + ": more than 4 ratings");
      }
    }
    if (!seen.insert(r.nodule_id).second) {
      throw DuplicateError(where + ": duplicate nodule_id '" + r.nodule_id + "'");
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("ratings CSV line 1: missing header");
  return out;
}

std::vector<NoduleRecord> read_ratings(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open ratings CSV: " + csv_path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ratings(ss.str());
}

void write_ratings(const std::filesystem::path& csv_path, const std::vector<NoduleRecord>& records) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + csv_path.string());
  out << kRatingsHeader << '\n';
  for (const auto& r : records) {
    out << r.series_id << ',' << r.nodule_id << ',' << text::format_double(r.center_world[0]) << ','
        << text::format_double(r.center_world[1]) << ',' << text::format_double(r.center_world[2]) << ','
        << text::format_double(r.diameter_mm) << ',';
    for (std::size_t i = 0; i < r.ratings.size(); ++i) {
      if (i) out << '|';
      out << r.ratings[i];
    }
    out << '\n';
  }
}

}  // namespace lmlcc
