#include "hpds/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace hpds::io {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericError("cannot serialize non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_scalar_array(const Json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

void dump_to(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + "  " + Json(key).dump() + ": ";
        dump_to(value, indent + 2, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (is_scalar_array(j)) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_to(j[i], indent, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad + "  ";
        dump_to(j[i], indent + 2, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

Vector values_from(const Json& j, Index expected, const char* what) {
  if (!j.is_array()) throw ArgumentError(std::string(what) + ": \"values\" must be an array");
  if (static_cast<Index>(j.size()) != expected)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) + " values, got " +
                     std::to_string(j.size()));
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Json values_json(const Eigen::Ref<const Vector>& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

const Json& field(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw ArgumentError(std::string(what) + ": missing \"" + key + "\"");
  return j.at(key);
}

Json ht_node_json(const HTucker& h, int i) {
  const auto& node = h.tree().node(i);
  Json out;
  out["modes"] = node.modes;
  if (node.is_leaf()) {
    out["factor"] = to_json(h.frame(i));
  } else {
    out["transfer"] = to_json(h.frame(i));
    out["left"] = ht_node_json(h, node.left);
    out["right"] = ht_node_json(h, node.right);
  }
  return out;
}

int ht_node_from(const Json& j, int parent, std::vector<DimensionTree::Node>& nodes,
                 std::vector<Matrix>& frames) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  frames.emplace_back();
  nodes.back().modes = field(j, "modes", "ht node").get<ModeSet>();
  nodes.back().parent = parent;
  if (j.contains("factor")) {
    frames[static_cast<std::size_t>(id)] = matrix_from_json(j.at("factor"));
    return id;
  }
  frames[static_cast<std::size_t>(id)] = matrix_from_json(field(j, "transfer", "ht node"));
  const int left = ht_node_from(field(j, "left", "ht node"), id, nodes, frames);
  const int right = ht_node_from(field(j, "right", "ht node"), id, nodes, frames);
  nodes[static_cast<std::size_t>(id)].left = left;
  nodes[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
    std::size_t s = 0;
    while (s < cell.size() && std::isspace(static_cast<unsigned char>(cell[s]))) ++s;
    out.push_back(cell.substr(s));
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  dump_to(j, 0, out);
  out += "\n";
  return out;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("invalid JSON: ") + e.what());
  }
}

Json to_json(const Tensor& t) {
  Json out;
  out["dims"] = t.dims();
  out["values"] = values_json(t.values());
  return out;
}

Json to_json(const Matrix& m) {
  Json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["values"] = values_json(m.reshaped());
  return out;
}

Json to_json(const TensorTrain& tt) {
  Json out;
  out["dims"] = tt.dims();
  out["ranks"] = tt.ranks();
  Json cores = Json::array();
  for (const auto& c : tt.cores()) cores.push_back(to_json(c));
  out["cores"] = std::move(cores);
  return out;
}

Json to_json(const HTucker& h) { return ht_node_json(h, 0); }

Json to_json(const HpdsModel& m) {
  Json out;
  out["k"] = m.order();
  out["n"] = m.state_dim();
  out["repr"] = to_string(m.representation());
  std::visit([&](const auto& a) { out["A"] = to_json(a); }, m.dynamics());
  out["B"] = m.B() ? to_json(*m.B()) : Json(nullptr);
  out["C"] = m.C() ? to_json(*m.C()) : Json(nullptr);
  return out;
}

Json to_json(const IdentifiabilityReport& r) {
  Json out;
  out["observed_rank"] = r.observed_rank;
  out["required_rank"] = r.required_rank;
  out["satisfied"] = r.satisfied;
  out["margin"] = r.margin;
  out["ill_conditioned"] = r.ill_conditioned;
  if (r.output_rank) out["output_rank"] = *r.output_rank;
  if (r.state_dim) out["state_dim"] = *r.state_dim;
  return out;
}

Tensor tensor_from_json(const Json& j) {
  try {
    Dims dims = field(j, "dims", "tensor").get<Dims>();
    detail::check_dims(dims);
    Vector v = values_from(field(j, "values", "tensor"), detail::product(dims), "tensor");
    return Tensor(std::move(dims), std::move(v));
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("tensor: ") + e.what());
  }
}

Matrix matrix_from_json(const Json& j) {
  try {
    const Index rows = field(j, "rows", "matrix").get<Index>();
    const Index cols = field(j, "cols", "matrix").get<Index>();
    if (rows < 0 || cols < 0) throw ShapeError("matrix: negative dimension");
    Vector v = values_from(field(j, "values", "matrix"), rows * cols, "matrix");
    return v.reshaped(rows, cols);
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("matrix: ") + e.what());
  }
}

TensorTrain tt_from_json(const Json& j) {
  const Json& cores = field(j, "cores", "tensor train");
  if (!cores.is_array()) throw ArgumentError("tensor train: \"cores\" must be an array");
  std::vector<Tensor> out;
  for (const auto& c : cores) out.push_back(tensor_from_json(c));
  TensorTrain tt(std::move(out));
  if (j.contains("dims") && j.at("dims").get<Dims>() != tt.dims())
    throw ShapeError("tensor train: \"dims\" disagrees with the cores");
  if (j.contains("ranks") && j.at("ranks").get<std::vector<Index>>() != tt.ranks())
    throw ShapeError("tensor train: \"ranks\" disagrees with the cores");
  return tt;
}

HTucker ht_from_json(const Json& j) {
  try {
    std::vector<DimensionTree::Node> nodes;
    std::vector<Matrix> frames;
    ht_node_from(j, -1, nodes, frames);
    return HTucker(DimensionTree(std::move(nodes)), std::move(frames));
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("hierarchical Tucker: ") + e.what());
  }
}

HpdsModel model_from_json(const Json& j) {
  try {
    const Representation r = parse_representation(field(j, "repr", "model").get<std::string>());
    const Json& a = field(j, "A", "model");
    Dynamics dyn;
    switch (r) {
      case Representation::kFull: dyn = tensor_from_json(a); break;
      case Representation::kTt: dyn = tt_from_json(a); break;
      case Representation::kHt: dyn = ht_from_json(a); break;
    }
    std::optional<Matrix> b, c;
    if (j.contains("B") && !j.at("B").is_null()) b = matrix_from_json(j.at("B"));
    if (j.contains("C") && !j.at("C").is_null()) c = matrix_from_json(j.at("C"));
    HpdsModel m(std::move(dyn), std::move(b), std::move(c));
    if (j.contains("k") && j.at("k").get<int>() != m.order())
      throw ShapeError("model: \"k\" disagrees with the dynamics order");
    if (j.contains("n") && j.at("n").get<Index>() != m.state_dim())
      throw ShapeError("model: \"n\" disagrees with the dynamics size");
    return m;
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("model: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ArgumentError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ArgumentError("cannot rename onto '" + path + "'");
  }
}

std::string trajectory_csv(const SampleSet& s, bool discrete) {
  s.validate();
  const Index n = s.X0.rows(), T = s.samples();
  std::string out = "t";
  for (Index i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (Index i = 1; i <= n; ++i) out += ",dx" + std::to_string(i);
  if (s.U0)
    for (Index i = 1; i <= s.U0->rows(); ++i) out += ",u" + std::to_string(i);
  if (s.Y0)
    for (Index i = 1; i <= s.Y0->rows(); ++i) out += ",y" + std::to_string(i);
  out += "\n";
  const Matrix dx = discrete ? Matrix((s.X1 - s.X0) / s.tau) : s.X1;
  for (Index c = 0; c < T; ++c) {
    out += format_double(s.t0 + static_cast<double>(c) * s.tau);
    for (Index i = 0; i < n; ++i) out += "," + format_double(s.X0(i, c));
    for (Index i = 0; i < n; ++i) out += "," + format_double(dx(i, c));
    if (s.U0)
      for (Index i = 0; i < s.U0->rows(); ++i) out += "," + format_double((*s.U0)(i, c));
    if (s.Y0)
      for (Index i = 0; i < s.Y0->rows(); ++i) out += "," + format_double((*s.Y0)(i, c));
    out += "\n";
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ArgumentError("trajectory: empty file");
  const auto header = split(lines[0], ',');
  if (header.empty() || header[0] != "t") throw ArgumentError("trajectory: header must start with 't'");
  // Column groups keyed by prefix; indices must run 1..count in order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups = {
      {"x", {}}, {"dx", {}}, {"u", {}}, {"y", {}}};
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    std::size_t digits = h.find_first_of("0123456789");
    if (digits == std::string::npos || digits == 0)
      throw ArgumentError("trajectory: unrecognised column '" + h + "'");
    const std::string prefix = h.substr(0, digits);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == prefix; });
    if (it == groups.end()) throw ArgumentError("trajectory: unrecognised column '" + h + "'");
    if (h.substr(digits) != std::to_string(it->second.size() + 1))
      throw ArgumentError("trajectory: column '" + h + "' out of order");
    it->second.push_back(c);
  }
  const Index T = static_cast<Index>(lines.size()) - 1;
  Trajectory out;
  out.t.resize(T);
  std::vector<Matrix> mats;
  for (const auto& g : groups) mats.emplace_back(static_cast<Index>(g.second.size()), T);
  for (Index r = 0; r < T; ++r) {
    const auto cells = split(lines[static_cast<std::size_t>(r + 1)], ',');
    if (cells.size() != header.size())
      throw ShapeError("trajectory: row " + std::to_string(r + 1) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(header.size()));
    double v = 0;
    if (!parse_number(cells[0], v)) throw ArgumentError("trajectory: bad number '" + cells[0] + "'");
    out.t(r) = v;
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t i = 0; i < groups[g].second.size(); ++i) {
        const std::string& cell = cells[groups[g].second[i]];
        if (!parse_number(cell, v)) throw ArgumentError("trajectory: bad number '" + cell + "'");
        mats[g](static_cast<Index>(i), r) = v;
      }
  }
  if (mats[0].rows() == 0) throw ArgumentError("trajectory: no state columns");
  out.x = mats[0];
  if (mats[1].rows()) {
    if (mats[1].rows() != mats[0].rows()) throw ShapeError("trajectory: dx and x widths differ");
    out.dx = mats[1];
  }
  if (mats[2].rows()) out.u = mats[2];
  if (mats[3].rows()) out.y = mats[3];
  return out;
}

Matrix parse_numeric_csv(const std::string& text) {
  auto lines = lines_of(text);
  std::vector<std::vector<double>> rows;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto cells = split(lines[l], ',');
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      double v = 0;
      if (!parse_number(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (l == 0) continue;
      throw ArgumentError("csv: non-numeric field on line " + std::to_string(l + 1));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ShapeError("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

}  // namespace hpds::io
