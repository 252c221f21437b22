#include "aerocouple/history.hpp"

#include "aerocouple/error.hpp"
#include "aerocouple/model.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace aerocouple {

namespace {

void append(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  out += buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return lines;
}

}  // namespace

std::string format_history(std::span<const HistoryRecord> records, int num_modes) {
  std::string out = "time";
  for (const char* prefix : {"q_", "qd_", "f_"}) {
    for (int i = 1; i <= num_modes; ++i) out += "," + std::string(prefix) + std::to_string(i);
  }
  out += '\n';
  double last_time = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.q.size() != num_modes || r.qdot.size() != num_modes || r.force.size() != num_modes) {
      throw InvalidArgument("history record size does not match " + std::to_string(num_modes) + " modes");
    }
    if (!(r.time > last_time)) throw InvalidArgument("history times must increase");
    last_time = r.time;
    append(out, r.time);
    for (const auto* v : {&r.q, &r.qdot, &r.force}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        out += ',';
        append(out, (*v)[i]);
      }
    }
    out += '\n';
  }
  return out;
}

void write_history(const std::filesystem::path& path, std::span<const HistoryRecord> records, int num_modes) {
  write_text(path, format_history(records, num_modes));
}

std::vector<HistoryRecord> parse_history(std::string_view text) {
  const auto table = parse_csv(text);
  const auto columns = static_cast<int>(table.header.size());
  if (columns < 4 || (columns - 1) % 3 != 0 || table.header[0] != "time") {
    throw ParseError("history header must be time,q_1..q_n,qd_1..qd_n,f_1..f_n", 1, 1);
  }
  const int n = (columns - 1) / 3;
  for (int i = 0; i < n; ++i) {
    const auto idx = std::to_string(i + 1);
    if (table.header[1 + i] != "q_" + idx || table.header[1 + n + i] != "qd_" + idx ||
        table.header[1 + 2 * n + i] != "f_" + idx) {
      throw ParseError("unexpected history column layout", 1, 1);
    }
  }
  std::vector<HistoryRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (!records.empty() && !(row[0] > records.back().time)) {
      throw ParseError("history times must increase (record " + std::to_string(records.size() + 1) + ")");
    }
    HistoryRecord r;
    r.time = row[0];
    r.q = Eigen::Map<const Eigen::VectorXd>(row.data() + 1, n);
    r.qdot = Eigen::Map<const Eigen::VectorXd>(row.data() + 1 + n, n);
    r.force = Eigen::Map<const Eigen::VectorXd>(row.data() + 1 + 2 * n, n);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<HistoryRecord> read_history(const std::filesystem::path& path) {
  return parse_history(read_text(path));
}

void write_fsi_log(const std::filesystem::path& path, std::span<const FsiIterationRecord> records) {
  std::string out = "step,iter,residual_rms,omega,seconds\n";
  for (const auto& r : records) {
    out += std::to_string(r.step) + ',' + std::to_string(r.iteration) + ',';
    append(out, r.residual_rms);
    out += ',';
    append(out, r.omega);
    out += ',';
    append(out, r.seconds);
    out += '\n';
  }
  write_text(path, out);
}

int CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const int idx = column_index(name);
  if (idx < 0) throw InvalidArgument("no column named '" + std::string(name) + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[static_cast<std::size_t>(idx)]);
  return out;
}

CsvTable parse_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("empty CSV input");
  CsvTable table;
  for (const auto field : split(lines[0])) table.header.emplace_back(field);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto fields = split(lines[l]);
    const int line_number = static_cast<int>(l) + 1;
    if (fields.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_number);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    int column = 1;
    for (const auto field : fields) {
      const auto v = parse_real(field);
      if (!v) throw ParseError("bad number '" + std::string(field) + "'", line_number, column);
      row.push_back(*v);
      column += static_cast<int>(field.size()) + 1;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append(out, row[i]);
    }
    out += '\n';
  }
  write_text(path, out);
}

}  // namespace aerocouple
