#include "gfs/io.hpp"

#include <array>
#include <cmath>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gfs/error.hpp"

namespace gfs {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic{'G', 'F', 'S', 'F'};
constexpr std::size_t kHeaderBytes = 12;

[[noreturn]] void fail(const fs::path& file, const std::string& where, const std::string& why) {
  throw DataError(file.filename().string() + ":" + where + ": " + why);
}

std::string line_ref(std::size_t line) { return "line " + std::to_string(line); }

std::ifstream open_in(const fs::path& file, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(file, mode);
  if (!in) throw DataError(file.string() + ": cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& file, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(file, mode | std::ios::trunc);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

json read_json(const fs::path& file) {
  auto in = open_in(file);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(file, "offset " + std::to_string(e.byte), "invalid JSON");
  }
}

std::vector<std::size_t> read_index_array(const json& doc, const char* key, std::size_t n,
                                          const fs::path& file) {
  if (!doc.contains(key)) fail(file, key, "missing array");
  const auto& arr = doc.at(key);
  if (!arr.is_array()) fail(file, key, "expected an array of indices");
  std::vector<std::size_t> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& v = arr[i];
    if (!v.is_number_unsigned()) {
      fail(file, std::string(key) + "[" + std::to_string(i) + "]", "expected a non-negative integer");
    }
    const auto idx = v.get<std::uint64_t>();
    if (idx >= n) {
      fail(file, std::string(key) + "[" + std::to_string(i) + "]",
           "index " + std::to_string(idx) + " >= N = " + std::to_string(n));
    }
    out.push_back(static_cast<std::size_t>(idx));
  }
  return out;
}

}  // namespace

const char* to_string(Task task) { return task == Task::binary ? "binary" : "multiclass"; }

Task task_from_string(const std::string& name) {
  if (name == "multiclass") return Task::multiclass;
  if (name == "binary") return Task::binary;
  throw InvalidArgument("unknown task '" + name + "' (expected multiclass or binary)");
}

std::vector<Edge> read_edges_tsv(const fs::path& file) {
  auto in = open_in(file);
  std::vector<Edge> edges;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::string_view s(raw);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto sep = s.find_first_of("\t ");
    if (sep == std::string_view::npos) fail(file, line_ref(line), "expected two node ids");
    std::uint64_t u = 0, v = 0;
    if (!parse_number(s.substr(0, sep), u) || !parse_number(s.substr(sep + 1), v)) {
      fail(file, line_ref(line), "expected two non-negative integer node ids");
    }
    if (u > 0xffffffffULL || v > 0xffffffffULL) fail(file, line_ref(line), "node id overflows 32 bits");
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

FeatureMatrix read_features_fbin(const fs::path& file) {
  auto in = open_in(file, std::ios::binary);
  std::vector<unsigned char> header(kHeaderBytes);
  in.read(reinterpret_cast<char*>(header.data()), static_cast<std::streamsize>(kHeaderBytes));
  if (in.gcount() < 4 || std::memcmp(header.data(), kMagic.data(), 4) != 0) {
    fail(file, "offset 0", "bad magic");
  }
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    fail(file, "offset " + std::to_string(in.gcount()), "truncated header");
  }
  const std::uint32_t n = read_u32_le(header.data() + 4);
  const std::uint32_t m = read_u32_le(header.data() + 8);
  const std::size_t count = static_cast<std::size_t>(n) * m;
  std::vector<unsigned char> body(count * 4);
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (static_cast<std::size_t>(in.gcount()) != body.size()) {
    fail(file, "offset " + std::to_string(kHeaderBytes + static_cast<std::size_t>(in.gcount())),
         "truncated data (expected " + std::to_string(count) + " float32 values)");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    fail(file, "offset " + std::to_string(kHeaderBytes + body.size()), "trailing bytes after data");
  }
  Matrix x(n, m);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = read_u32_le(body.data() + 4 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f)) {
      fail(file, "offset " + std::to_string(kHeaderBytes + 4 * i), "non-finite value");
    }
    x.data()[i] = static_cast<double>(f);
  }
  return FeatureMatrix(std::move(x));
}

FeatureMatrix read_features_csv(const fs::path& file) {
  auto in = open_in(file);
  std::vector<double> values;
  std::size_t width = 0, rows = 0;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::string_view s = trim(raw);
    if (s.empty()) {
      // Only trailing blank lines are tolerated.
      std::string rest;
      while (std::getline(in, rest)) {
        ++line;
        if (!trim(rest).empty()) fail(file, line_ref(line), "data after blank line");
      }
      break;
    }
    std::size_t fields = 0;
    while (true) {
      const auto comma = s.find(',');
      double v = 0;
      if (!parse_number(s.substr(0, comma), v) || !std::isfinite(v)) {
        fail(file, line_ref(line) + " field " + std::to_string(fields + 1), "expected a finite real");
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    if (rows == 0) width = fields;
    if (fields != width) {
      fail(file, line_ref(line),
           "expected " + std::to_string(width) + " fields, found " + std::to_string(fields));
    }
    ++rows;
  }
  Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  std::copy(values.begin(), values.end(), x.data());
  return FeatureMatrix(std::move(x));
}

std::vector<int> read_labels_csv(const fs::path& file) {
  auto in = open_in(file);
  std::vector<int> labels;
  std::string raw;
  std::size_t blank_line = 0;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const std::string_view s = trim(raw);
    if (s.empty()) {
      if (!blank_line) blank_line = line;
      continue;
    }
    if (blank_line) fail(file, line_ref(blank_line), "blank line before end of file");
    int v = 0;
    if (!parse_number(s, v)) fail(file, line_ref(line), "expected an integer label");
    labels.push_back(v);
  }
  return labels;
}

Dataset load_dataset(const fs::path& dir, std::uint64_t split_seed) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": not a dataset directory");
  Dataset ds;

  const fs::path meta_file = dir / "meta.json";
  const json meta = read_json(meta_file);
  if (!meta.is_object()) fail(meta_file, "offset 0", "expected a JSON object");
  if (!meta.contains("num_classes") || !meta["num_classes"].is_number_integer()) {
    fail(meta_file, "num_classes", "missing or not an integer");
  }
  const int num_classes = meta["num_classes"].get<int>();
  if (num_classes < 1) fail(meta_file, "num_classes", "must be >= 1");
  if (!meta.contains("task") || !meta["task"].is_string()) fail(meta_file, "task", "missing or not a string");
  try {
    ds.task = task_from_string(meta["task"].get<std::string>());
  } catch (const InvalidArgument& e) {
    fail(meta_file, "task", e.what());
  }
  ds.name = meta.contains("name") && meta["name"].is_string() ? meta["name"].get<std::string>()
                                                              : dir.filename().string();

  if (fs::exists(dir / "features.fbin")) {
    ds.features = read_features_fbin(dir / "features.fbin");
  } else if (fs::exists(dir / "features.csv")) {
    ds.features = read_features_csv(dir / "features.csv");
  } else {
    throw DataError(dir.string() + ": neither features.fbin nor features.csv found");
  }
  const std::size_t n = ds.features.num_nodes();

  const fs::path label_file = dir / "labels.csv";
  auto labels = read_labels_csv(label_file);
  if (labels.size() != n) {
    fail(label_file, line_ref(labels.size() + 1),
         "found " + std::to_string(labels.size()) + " labels, features have " + std::to_string(n) +
             " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      fail(label_file, line_ref(i + 1),
           "label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  ds.labels = LabelVector(std::move(labels), num_classes);

  const fs::path edge_file = dir / "edges.tsv";
  const auto edges = read_edges_tsv(edge_file);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].first >= n || edges[i].second >= n) {
      // Line numbers are not kept per edge; report the edge ordinal instead.
      fail(edge_file, "edge " + std::to_string(i + 1),
           "node id " + std::to_string(std::max(edges[i].first, edges[i].second)) +
               " >= N = " + std::to_string(n));
    }
  }
  ds.graph = build_graph(edges, n);

  const fs::path split_file = dir / "splits.json";
  if (fs::exists(split_file)) {
    const json doc = read_json(split_file);
    if (!doc.is_object()) fail(split_file, "offset 0", "expected a JSON object");
    ds.split.train = read_index_array(doc, "train", n, split_file);
    ds.split.val = read_index_array(doc, "val", n, split_file);
    ds.split.test = read_index_array(doc, "test", n, split_file);
    try {
      ds.split.validate(n);
    } catch (const DataError& e) {
      fail(split_file, "splits", e.what());
    }
  } else {
    ds.split = random_split(n, split_seed);
  }
  ds.validate();
  return ds;
}

void write_features_fbin(const FeatureMatrix& x, const fs::path& file) {
  auto out = open_out(file, std::ios::binary);
  out.write(kMagic.data(), 4);
  write_u32_le(out, static_cast<std::uint32_t>(x.num_nodes()));
  write_u32_le(out, static_cast<std::uint32_t>(x.num_features()));
  const Matrix& v = x.values();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v.data()[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32_le(out, bits);
  }
  if (!out) throw DataError(file.string() + ": write failed");
}

void write_features_csv(const FeatureMatrix& x, const fs::path& file) {
  auto out = open_out(file);
  const Matrix& v = x.values();
  char buf[64];
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v(r, c));
      if (c) out.put(',');
      out.write(buf, end - buf);
    }
    out.put('\n');
  }
  if (!out) throw DataError(file.string() + ": write failed");
}

void save_dataset(const Dataset& ds, const fs::path& dir, FeatureFormat format) {
  ds.validate();
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "edges.tsv");
    out << "# " << ds.graph.num_nodes() << " nodes, " << ds.graph.num_edges() << " edges\n";
    for (const auto& [u, v] : ds.graph.edge_list()) out << u << '\t' << v << '\n';
  }
  if (format == FeatureFormat::fbin) {
    write_features_fbin(ds.features, dir / "features.fbin");
    fs::remove(dir / "features.csv");
  } else {
    write_features_csv(ds.features, dir / "features.csv");
    fs::remove(dir / "features.fbin");
  }
  {
    auto out = open_out(dir / "labels.csv");
    for (int y : ds.labels.labels()) out << y << '\n';
  }
  {
    const json meta{{"name", ds.name}, {"num_classes", ds.labels.num_classes()},
                    {"task", to_string(ds.task)}};
    open_out(dir / "meta.json") << meta.dump(2) << '\n';
  }
  {
    const json split{{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}};
    open_out(dir / "splits.json") << split.dump() << '\n';
  }
}

}  // namespace gfs
