#include "gaze2d/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gaze2d/errors.hpp"

namespace gaze2d {

std::vector<int> Dataset::subject_ids() const {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.subject_id);
  return {ids.begin(), ids.end()};
}

std::vector<const GazeSample*> Dataset::subject_split(int subject_id, Split split) const {
  std::vector<const GazeSample*> out;
  for (const auto& s : samples)
    if (s.subject_id == subject_id && s.split == split) out.push_back(&s);
  return out;
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, int line_no, const char* col) {
  double out = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw SchemaError("line " + std::to_string(line_no) + ": column '" + col +
                      "' is not a number: '" + field + "'");
  }
  return out;
}

namespace {

std::int64_t parse_int(const std::string& field, int line_no, const char* col) {
  std::int64_t out = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw SchemaError("line " + std::to_string(line_no) + ": column '" + col +
                      "' is not an integer: '" + field + "'");
  }
  return out;
}

}  // namespace

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> expected_header(int k) {
  std::vector<std::string> h = {"sample_id", "subject_id", "split", "ox_mm", "oy_mm",
                                "oz_mm",     "gbx",        "gby",   "gbz",   "gfx",
                                "gfy",       "gfz"};
  for (int i = 1; i <= k; ++i) {
    h.push_back("j" + std::to_string(i) + "_x");
    h.push_back("j" + std::to_string(i) + "_y");
    h.push_back("j" + std::to_string(i) + "_z");
  }
  h.push_back("pu_mm");
  h.push_back("pv_mm");
  return h;
}

UnitVec3 checked_direction(double x, double y, double z, int line_no, const char* what) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (std::abs(n - 1.0) > 1e-6) {
    throw SchemaError("line " + std::to_string(line_no) + ": " + what +
                      " is not unit-norm (|v| = " + format_double(n) + ")");
  }
  return normalize(Vec3{x, y, z});
}

}  // namespace

Dataset read_samples_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);

  std::string line;
  if (!std::getline(f, line)) throw SchemaError("line 1: missing header row");
  const auto header = split_line(line);
  // 14 fixed columns + 3 per jitter variant.
  if (header.size() < 17 || (header.size() - 14) % 3 != 0) {
    throw SchemaError("line 1: expected 14 + 3K columns, got " +
                      std::to_string(header.size()));
  }
  const int k = static_cast<int>((header.size() - 14) / 3);
  const auto expect = expected_header(k);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    if (header[i] != expect[i]) {
      throw SchemaError("line 1: column " + std::to_string(i + 1) + " is '" +
                        header[i] + "', expected '" + expect[i] + "'");
    }
  }

  Dataset out;
  out.n_jitter = k;
  std::set<std::int64_t> seen_ids;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != expect.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expect.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    GazeSample s;
    s.sample_id = parse_int(fields[0], line_no, "sample_id");
    if (!seen_ids.insert(s.sample_id).second) {
      throw SchemaError("line " + std::to_string(line_no) + ": duplicate sample_id " +
                        std::to_string(s.sample_id));
    }
    s.subject_id = static_cast<int>(parse_int(fields[1], line_no, "subject_id"));
    if (fields[2] == "train") {
      s.split = Split::kTrain;
    } else if (fields[2] == "test") {
      s.split = Split::kTest;
    } else {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": split must be 'train' or 'test', got '" + fields[2] + "'");
    }
    s.o = {parse_double(fields[3], line_no, "ox_mm"),
           parse_double(fields[4], line_no, "oy_mm"),
           parse_double(fields[5], line_no, "oz_mm")};
    s.g_base = checked_direction(parse_double(fields[6], line_no, "gbx"),
                                 parse_double(fields[7], line_no, "gby"),
                                 parse_double(fields[8], line_no, "gbz"), line_no,
                                 "base prediction");
    s.g_base_flipped = checked_direction(parse_double(fields[9], line_no, "gfx"),
                                         parse_double(fields[10], line_no, "gfy"),
                                         parse_double(fields[11], line_no, "gfz"),
                                         line_no, "flipped prediction");
    s.jitter.reserve(k);
    for (int j = 0; j < k; ++j) {
      const std::size_t base = 12 + 3 * static_cast<std::size_t>(j);
      s.jitter.push_back(checked_direction(
          parse_double(fields[base], line_no, "jitter x"),
          parse_double(fields[base + 1], line_no, "jitter y"),
          parse_double(fields[base + 2], line_no, "jitter z"), line_no,
          "jitter variant"));
    }
    s.label = {parse_double(fields[12 + 3 * static_cast<std::size_t>(k)], line_no, "pu_mm"),
               parse_double(fields[13 + 3 * static_cast<std::size_t>(k)], line_no, "pv_mm")};
    if (!all_finite(s.o) || !std::isfinite(s.label.u) || !std::isfinite(s.label.v)) {
      throw SchemaError("line " + std::to_string(line_no) + ": non-finite value");
    }
    out.samples.push_back(std::move(s));
  }
  return out;
}

void write_samples_csv(const std::string& path, const Dataset& data) {
  std::string buf;
  const auto header = expected_header(data.n_jitter);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf += ',';
    buf += header[i];
  }
  buf += '\n';

  for (const GazeSample& s : data.samples) {
    if (static_cast<int>(s.jitter.size()) != data.n_jitter) {
      throw SchemaError("sample " + std::to_string(s.sample_id) +
                        ": jitter count mismatch");
    }
    buf += std::to_string(s.sample_id);
    buf += ',';
    buf += std::to_string(s.subject_id);
    buf += ',';
    buf += to_string(s.split);
    const double nums_head[] = {s.o.x, s.o.y, s.o.z, s.g_base.x, s.g_base.y,
                                s.g_base.z, s.g_base_flipped.x, s.g_base_flipped.y,
                                s.g_base_flipped.z};
    for (double x : nums_head) {
      buf += ',';
      buf += format_double(x);
    }
    for (const UnitVec3& j : s.jitter) {
      buf += ',';
      buf += format_double(j.x);
      buf += ',';
      buf += format_double(j.y);
      buf += ',';
      buf += format_double(j.z);
    }
    buf += ',';
    buf += format_double(s.label.u);
    buf += ',';
    buf += format_double(s.label.v);
    buf += '\n';
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << buf;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace gaze2d
