#include "aerocouple/model.hpp"

#include "aerocouple/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace aerocouple {

namespace {

struct Field {
  std::string_view text;
  int column = 1;
};

struct Line {
  int number = 0;
  std::string_view text;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<Line> significant_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    ++number;
    const auto body = trim(raw);
    if (!body.empty() && body.front() != '$') lines.push_back({number, raw});
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return lines;
}

std::vector<Field> split_fields(std::string_view raw) {
  std::vector<Field> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = raw.find(',', start);
    const auto piece = raw.substr(start, comma == std::string_view::npos ? raw.size() - start : comma - start);
    const auto lead = piece.find_first_not_of(" \t");
    const int column = static_cast<int>(start + (lead == std::string_view::npos ? 0 : lead)) + 1;
    fields.push_back({trim(piece), column});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

class CardReader {
public:
  explicit CardReader(std::string_view text) : lines_(significant_lines(text)) {}

  bool has_more() const { return next_ < lines_.size(); }

  const Line& take(int owner_line, const char* what) {
    if (next_ >= lines_.size()) {
      throw ParseError(std::string("unexpected end of input while reading ") + what, owner_line);
    }
    return lines_[next_++];
  }

private:
  std::vector<Line> lines_;
  std::size_t next_ = 0;
};

int to_int(const Field& f, int line, const char* what) {
  int value = 0;
  const auto* first = f.text.data();
  const auto* last = first + f.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (f.text.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(std::string("expected integer ") + what + ", got '" + std::string(f.text) + "'",
                     line, f.column);
  }
  return value;
}

double to_real(const Field& f, int line, const char* what) {
  const auto value = parse_real(f.text);
  if (!value) {
    throw ParseError(std::string("expected real ") + what + ", got '" + std::string(f.text) + "'", line,
                     f.column);
  }
  return *value;
}

void expect_count(const std::vector<Field>& fields, std::size_t count, const Line& line,
                  const char* card) {
  if (fields.size() != count) {
    const int column = fields.size() > count ? fields[count].column : static_cast<int>(line.text.size()) + 1;
    throw ParseError(std::string(card) + " expects " + std::to_string(count) + " fields, got " +
                         std::to_string(fields.size()),
                     line.number, column);
  }
}

Eigen::MatrixXd read_square_block(CardReader& reader, const Line& header, const std::vector<Field>& fields,
                                  const char* card) {
  expect_count(fields, 2, header, card);
  const int n = to_int(fields[1], header.number, "matrix size");
  if (n < 1) throw ParseError(std::string(card) + " size must be positive", header.number, fields[1].column);
  Eigen::MatrixXd block(n, n);
  for (int r = 0; r < n; ++r) {
    const Line& row = reader.take(header.number, card);
    const auto entries = split_fields(row.text);
    expect_count(entries, static_cast<std::size_t>(n), row, card);
    for (int c = 0; c < n; ++c) block(r, c) = to_real(entries[c], row.number, "matrix entry");
  }
  return block;
}

struct ModeBlock {
  int index = 0;
  int line = 0;
  double frequency = 0.0;
  Eigen::VectorXd shape;
};

}  // namespace

std::optional<double> parse_real(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  std::string buffer(field);
  for (auto& ch : buffer) {
    if (ch == 'd' || ch == 'D') ch = 'e';
  }
  const bool has_exponent = buffer.find_first_of("eE") != std::string::npos;
  if (!has_exponent) {
    // Nastran shorthand: a sign after the mantissa starts the exponent.
    const auto sign = buffer.find_first_of("+-", 1);
    if (sign != std::string::npos) buffer.insert(sign, 1, 'e');
  }
  std::size_t start = 0;
  if (buffer[0] == '+') start = 1;  // from_chars rejects a leading '+'
  double value = 0.0;
  const char* first = buffer.data() + start;
  const char* last = buffer.data() + buffer.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

int StructuralModel::node_index(int id) const {
  const auto it = std::find_if(nodes.begin(), nodes.end(), [id](const GridNode& n) { return n.id == id; });
  return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

Eigen::MatrixX3d StructuralModel::node_positions() const {
  Eigen::MatrixX3d xyz(nodes.size(), 3);
  for (std::size_t i = 0; i < nodes.size(); ++i) xyz.row(static_cast<Eigen::Index>(i)) = nodes[i].position;
  return xyz;
}

Eigen::MatrixXd StructuralModel::translation_modes() const {
  Eigen::MatrixXd out(3 * nodes.size(), modes.cols());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(nodes.size()); ++i) {
    out.middleRows(3 * i, 3) = modes.middleRows(kDofsPerNode * i, 3);
  }
  return out;
}

void StructuralModel::validate() const {
  if (nodes.empty()) throw ValidationError("model has no GRID nodes");
  std::unordered_set<int> seen;
  for (const auto& node : nodes) {
    if (!seen.insert(node.id).second) throw ValidationError("duplicate node id " + std::to_string(node.id));
    if (!node.position.allFinite()) throw ValidationError("non-finite position for node " + std::to_string(node.id));
  }
  const Eigen::Index n = modes.cols();
  if (n < 1) throw ValidationError("model has no modes");
  if (modes.rows() != kDofsPerNode * static_cast<Eigen::Index>(nodes.size())) {
    throw ValidationError("mode matrix has " + std::to_string(modes.rows()) + " rows, expected " +
                          std::to_string(kDofsPerNode * nodes.size()));
  }
  if (frequencies.size() != n || damping_ratios.size() != n) {
    throw ValidationError("frequency/damping lists do not match the number of modes");
  }
  if (mass.rows() != n || mass.cols() != n || stiffness.rows() != n || stiffness.cols() != n) {
    throw ValidationError("generalized mass/stiffness must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!modes.allFinite() || !mass.allFinite() || !stiffness.allFinite() || !frequencies.allFinite() ||
      !damping_ratios.allFinite()) {
    throw ValidationError("model contains non-finite values");
  }
  if ((damping_ratios.array() < 0.0).any()) throw ValidationError("negative modal damping ratio");

  const auto symmetric = [](const Eigen::MatrixXd& a) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale;
  };
  if (!symmetric(mass)) throw ValidationError("generalized mass is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw ValidationError("generalized mass is not positive definite");
  if (!symmetric(stiffness)) throw ValidationError("generalized stiffness is not symmetric");
  const Eigen::VectorXd kev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(stiffness, Eigen::EigenvaluesOnly).eigenvalues();
  const double kscale = std::max(kev.cwiseAbs().maxCoeff(), 1e-300);
  if (kev.minCoeff() < -1e-8 * kscale) throw ValidationError("generalized stiffness is not positive semidefinite");

  if (damping_matrix) {
    const auto& c = *damping_matrix;
    if (c.rows() != n || c.cols() != n) throw ValidationError("damping matrix has wrong size");
    if (!c.allFinite() || !symmetric(c)) throw ValidationError("damping matrix is not symmetric");
  }

  if (diagonal) {
    if (!mass.isIdentity(1e-10)) throw ValidationError("diagonal model requires unit generalized mass");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double expected = i == j ? frequencies[i] * frequencies[i] : 0.0;
        if (std::abs(stiffness(i, j) - expected) > 1e-10 * std::max(1.0, std::abs(expected))) {
          throw ValidationError("diagonal model requires K = diag(omega^2)");
        }
      }
    }
  }
}

bool StructuralModel::operator==(const StructuralModel& other) const {
  const auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  if (damping_matrix.has_value() != other.damping_matrix.has_value()) return false;
  if (damping_matrix && !same(*damping_matrix, *other.damping_matrix)) return false;
  return nodes == other.nodes && same(modes, other.modes) && same(frequencies, other.frequencies) &&
         same(mass, other.mass) && same(stiffness, other.stiffness) &&
         same(damping_ratios, other.damping_ratios) && diagonal == other.diagonal;
}

StructuralModel make_diagonal_model(std::vector<GridNode> nodes, Eigen::MatrixXd modes,
                                    Eigen::VectorXd frequencies) {
  StructuralModel model;
  const auto n = modes.cols();
  model.nodes = std::move(nodes);
  model.modes = std::move(modes);
  model.frequencies = std::move(frequencies);
  model.mass = Eigen::MatrixXd::Identity(n, n);
  model.stiffness = model.frequencies.array().square().matrix().asDiagonal();
  model.damping_ratios = Eigen::VectorXd::Zero(n);
  model.diagonal = true;
  model.validate();
  return model;
}

StructuralModel parse_structural_model(std::string_view text) {
  CardReader reader(text);
  std::vector<GridNode> nodes;
  std::vector<ModeBlock> blocks;
  std::optional<Eigen::MatrixXd> genmass, genstif, gendamp;
  int genmass_line = 0;
  std::map<int, std::pair<double, int>> damp;  // mode index -> (xi, line)

  while (reader.has_more()) {
    const Line& line = reader.take(0, "card");
    const auto fields = split_fields(line.text);
    const std::string card = upper(fields[0].text);

    if (card == "GRID") {
      expect_count(fields, 5, line, "GRID");
      if (!blocks.empty()) throw ParseError("GRID card after MODE blocks", line.number, fields[0].column);
      GridNode node;
      node.id = to_int(fields[1], line.number, "node id");
      node.position = {to_real(fields[2], line.number, "x"), to_real(fields[3], line.number, "y"),
                       to_real(fields[4], line.number, "z")};
      const bool duplicate = std::any_of(nodes.begin(), nodes.end(), [&](const GridNode& n) { return n.id == node.id; });
      if (duplicate) throw ParseError("duplicate node id " + std::to_string(node.id), line.number, fields[1].column);
      nodes.push_back(node);
    } else if (card == "MODE") {
      expect_count(fields, 3, line, "MODE");
      if (nodes.empty()) throw ParseError("MODE block before any GRID card", line.number, fields[0].column);
      ModeBlock block;
      block.line = line.number;
      block.index = to_int(fields[1], line.number, "mode index");
      block.frequency = to_real(fields[2], line.number, "frequency");
      if (block.frequency < 0.0) throw ParseError("negative modal frequency", line.number, fields[2].column);
      for (const auto& other : blocks) {
        if (other.index == block.index) {
          throw ParseError("duplicate mode index " + std::to_string(block.index), line.number, fields[1].column);
        }
      }
      block.shape = Eigen::VectorXd::Zero(kDofsPerNode * static_cast<Eigen::Index>(nodes.size()));
      std::vector<bool> filled(nodes.size(), false);
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Line& row = reader.take(line.number, "MODE block");
        const auto entries = split_fields(row.text);
        if (entries.size() != 4 && entries.size() != 7) {
          throw ParseError("mode vector line expects node id + 3 or 6 components, got " +
                               std::to_string(entries.size()) + " fields",
                           row.number, entries.back().column);
        }
        const int id = to_int(entries[0], row.number, "node id");
        const auto it = std::find_if(nodes.begin(), nodes.end(), [id](const GridNode& n) { return n.id == id; });
        if (it == nodes.end()) {
          throw ParseError("mode vector for unknown node " + std::to_string(id), row.number, entries[0].column);
        }
        const auto idx = static_cast<std::size_t>(it - nodes.begin());
        if (filled[idx]) {
          throw ParseError("node " + std::to_string(id) + " repeated in MODE block", row.number, entries[0].column);
        }
        filled[idx] = true;
        for (std::size_t c = 1; c < entries.size(); ++c) {
          block.shape[static_cast<Eigen::Index>(kDofsPerNode * idx + c - 1)] =
              to_real(entries[c], row.number, "mode component");
        }
      }
      blocks.push_back(std::move(block));
    } else if (card == "GENMASS" || card == "GENSTIF" || card == "GENDAMP") {
      auto& target = card == "GENMASS" ? genmass : card == "GENSTIF" ? genstif : gendamp;
      if (target) throw ParseError("repeated " + card + " block", line.number, fields[0].column);
      if (card == "GENMASS") genmass_line = line.number;
      target = read_square_block(reader, line, fields, card.c_str());
    } else if (card == "DAMP") {
      expect_count(fields, 3, line, "DAMP");
      const int index = to_int(fields[1], line.number, "mode index");
      const double xi = to_real(fields[2], line.number, "damping ratio");
      if (xi < 0.0) throw ParseError("negative damping ratio", line.number, fields[2].column);
      if (!damp.emplace(index, std::make_pair(xi, line.number)).second) {
        throw ParseError("repeated DAMP for mode " + std::to_string(index), line.number, fields[1].column);
      }
    } else {
      throw ParseError("unknown card '" + std::string(fields[0].text) + "'", line.number, fields[0].column);
    }
  }

  if (nodes.empty()) throw ParseError("no GRID cards");
  if (blocks.empty()) throw ParseError("no MODE blocks");
  std::sort(blocks.begin(), blocks.end(), [](const ModeBlock& a, const ModeBlock& b) { return a.index < b.index; });
  const auto n = static_cast<Eigen::Index>(blocks.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (blocks[i].index != i + 1) {
      throw ParseError("mode indices must be 1.." + std::to_string(n), blocks[i].line);
    }
  }

  StructuralModel model;
  model.nodes = std::move(nodes);
  model.modes.resize(kDofsPerNode * static_cast<Eigen::Index>(model.nodes.size()), n);
  model.frequencies.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    model.modes.col(i) = blocks[i].shape;
    model.frequencies[i] = blocks[i].frequency;
  }
  model.damping_ratios = Eigen::VectorXd::Zero(n);
  for (const auto& [index, entry] : damp) {
    if (index < 1 || index > n) throw ParseError("DAMP refers to unknown mode " + std::to_string(index), entry.second);
    model.damping_ratios[index - 1] = entry.first;
  }

  const auto check_size = [n](const std::optional<Eigen::MatrixXd>& m, const char* card) {
    if (m && m->rows() != n) {
      throw ParseError(std::string(card) + " size " + std::to_string(m->rows()) + " does not match " +
                       std::to_string(n) + " modes");
    }
  };
  check_size(genmass, "GENMASS");
  check_size(genstif, "GENSTIF");
  check_size(gendamp, "GENDAMP");
  if (gendamp && !damp.empty()) throw ParseError("GENDAMP and DAMP cannot be combined");

  model.diagonal = !genmass && !genstif;
  model.mass = genmass ? *genmass : Eigen::MatrixXd::Identity(n, n);
  model.stiffness = genstif ? *genstif : Eigen::MatrixXd(model.frequencies.array().square().matrix().asDiagonal());
  model.damping_matrix = gendamp;

  if (genmass) {
    Eigen::LLT<Eigen::MatrixXd> llt(*genmass);
    const double scale = std::max(genmass->cwiseAbs().maxCoeff(), 1e-300);
    const bool symmetric = (*genmass - genmass->transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale;
    if (!symmetric || llt.info() != Eigen::Success) {
      throw ParseError("GENMASS is not symmetric positive definite", genmass_line);
    }
  }
  try {
    model.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return model;
}

StructuralModel load_structural_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open structural model '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_structural_model(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_block(std::ostringstream& out, const char* card, const Eigen::MatrixXd& m) {
  out << card << ',' << m.rows() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << real(m(r, c));
    out << '\n';
  }
}

}  // namespace

std::string serialize_structural_model(const StructuralModel& model) {
  std::ostringstream out;
  out << "$ structural model: " << model.num_nodes() << " nodes, " << model.num_modes() << " modes\n";
  for (const auto& node : model.nodes) {
    out << "GRID," << node.id << ',' << real(node.position.x()) << ',' << real(node.position.y()) << ','
        << real(node.position.z()) << '\n';
  }
  for (int j = 0; j < model.num_modes(); ++j) {
    out << "MODE," << j + 1 << ',' << real(model.frequencies[j]) << '\n';
    for (int i = 0; i < model.num_nodes(); ++i) {
      out << model.nodes[i].id;
      for (int c = 0; c < kDofsPerNode; ++c) out << ',' << real(model.modes(kDofsPerNode * i + c, j));
      out << '\n';
    }
  }
  if (!model.diagonal) {
    write_block(out, "GENMASS", model.mass);
    write_block(out, "GENSTIF", model.stiffness);
  }
  if (model.damping_matrix) write_block(out, "GENDAMP", *model.damping_matrix);
  for (int j = 0; j < model.num_modes(); ++j) {
    if (model.damping_ratios[j] != 0.0) out << "DAMP," << j + 1 << ',' << real(model.damping_ratios[j]) << '\n';
  }
  return out.str();
}

}  // namespace aerocouple
