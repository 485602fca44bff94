#include "arreg/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace arreg {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else if (ch != '\r') {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  for (std::string& f : fields) {
    const auto begin = f.find_first_not_of(" \t");
    const auto end = f.find_last_not_of(" \t");
    f = begin == std::string::npos ? std::string() : f.substr(begin, end - begin + 1);
  }
  return fields;
}

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& field, std::int64_t& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void row_fail(const std::string& path, std::size_t line,
                           const std::string& what) {
  throw Error(ErrorCode::ParseError,
              path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                std::size_t expected_fields,
                                                std::vector<std::size_t>& line_numbers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<std::string> fields = split_fields(line);
    if (rows.empty() && line_numbers.empty()) {
      // A non-numeric first row is treated as the header.
      double probe;
      if (!fields.empty() && !parse_double(fields.front(), probe)) {
        line_numbers.push_back(0);  // marks "header consumed"
        continue;
      }
    }
    if (fields.size() != expected_fields) {
      row_fail(path, line_no,
               "expected " + std::to_string(expected_fields) + " fields, got " +
                   std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
    line_numbers.push_back(line_no);
  }
  if (!line_numbers.empty() && line_numbers.front() == 0) {
    line_numbers.erase(line_numbers.begin());
  }
  return rows;
}

}  // namespace

std::vector<Correspondence> read_correspondences_csv(const std::string& path) {
  std::vector<std::size_t> lines;
  const auto rows = read_rows(path, 5, lines);
  std::vector<Correspondence> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double values[5];
    for (int f = 0; f < 5; ++f) {
      if (!parse_double(rows[i][f], values[f])) {
        row_fail(path, lines[i], "field " + std::to_string(f + 1) +
                                     " is not a number: \"" + rows[i][f] + "\"");
      }
    }
    out.push_back({{frames::world(), Vec3{values[0], values[1], values[2]}},
                   {values[3], values[4]}});
  }
  return out;
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
  std::vector<std::size_t> lines;
  const auto rows = read_rows(path, 4, lines);
  std::vector<TrajectoryRow> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    TrajectoryRow row;
    if (!parse_double(rows[i][0], row.t_s)) {
      row_fail(path, lines[i], "t_s is not a number");
    }
    if (!parse_int(rows[i][1], row.encoder_counts)) {
      row_fail(path, lines[i], "encoder_counts is not an integer");
    }
    if (!parse_double(rows[i][2], row.alpha_rad) ||
        !parse_double(rows[i][3], row.beta_rad)) {
      row_fail(path, lines[i], "turntable angle is not a number");
    }
    if (!out.empty() && row.t_s < out.back().t_s) {
      row_fail(path, lines[i], "timestamps must be monotone non-decreasing");
    }
    out.push_back(row);
  }
  return out;
}

std::string format_number(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

std::string tracking_samples_csv(std::span<const TrackingSample> samples) {
  std::string out = "t_s,expected_mm,measured_mm,error_mm\n";
  for (const TrackingSample& s : samples) {
    out += format_number(s.t_s) + "," + format_number(s.expected_offset_mm) +
           "," + format_number(s.measured_offset_mm) + "," +
           format_number(s.error_mm) + "\n";
  }
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "beta_deg,s_mm,sigma_x,sigma_y,sigma_z\n";
  for (const SweepRow& row : rows) {
    out += format_number(row.beta_rad * (180.0 / std::numbers::pi)) + "," +
           format_number(row.track_position_mm) + "," +
           format_number(row.budget.sigma_xw0_mm) + "," +
           format_number(row.budget.sigma_yw0_mm) + "," +
           format_number(row.budget.sigma_zw0_mm) + "\n";
  }
  return out;
}

std::string overlay_track_csv(std::span<const TrajectoryRow> trajectory,
                              std::span<const PixelPoint> pixels) {
  std::string out = "t_s,u_px,v_px\n";
  for (std::size_t i = 0; i < trajectory.size() && i < pixels.size(); ++i) {
    out += format_number(trajectory[i].t_s) + "," +
           format_number(pixels[i].u_px) + "," + format_number(pixels[i].v_px) +
           "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  }
  out << content;
  if (!out) {
    throw Error(ErrorCode::IoError, "failed while writing '" + path + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace arreg
