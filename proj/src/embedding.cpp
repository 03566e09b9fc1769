#include "aspem/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aspem {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

constexpr char kBinaryMagic[8] = {'A', 'S', 'P', 'E', 'M', 'B', 'I', 'N'};

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void get(std::ifstream& in, T& v, const std::string& path) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) fail(path + ": truncated binary embedding file");
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::string aspect_name, int dim)
    : aspect_name_(std::move(aspect_name)), dim_(dim) {
  if (dim <= 0) fail("embedding table: dimension must be positive");
}

int EmbeddingTable::add(const std::string& id) {
  if (index_.count(id)) fail("embedding table: duplicate node id '" + id + "'");
  int row = static_cast<int>(ids_.size());
  ids_.push_back(id);
  index_.emplace(id, row);
  data_.resize(data_.size() + dim_, 0.0);
  return row;
}

int EmbeddingTable::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

bool EmbeddingTable::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void write_embedding(const EmbeddingTable& table, const std::string& path, bool binary) {
  if (binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write embedding file '" + path + "'");
    out.write(kBinaryMagic, sizeof kBinaryMagic);
    std::uint32_t name_len = static_cast<std::uint32_t>(table.aspect_name().size());
    put(out, name_len);
    out.write(table.aspect_name().data(), name_len);
    std::int64_t count = table.size();
    std::int32_t dim = table.dim();
    put(out, count);
    put(out, dim);
    for (int i = 0; i < table.size(); ++i) {
      std::uint32_t id_len = static_cast<std::uint32_t>(table.id(i).size());
      put(out, id_len);
      out.write(table.id(i).data(), id_len);
      auto r = table.row(i);
      out.write(reinterpret_cast<const char*>(r.data()), sizeof(double) * r.size());
    }
    return;
  }
  std::ofstream out(path);
  if (!out) fail("cannot write embedding file '" + path + "'");
  out << table.aspect_name() << ' ' << table.size() << ' ' << table.dim() << '\n';
  char buf[40];
  for (int i = 0; i < table.size(); ++i) {
    out << table.id(i) << '\t';
    auto r = table.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", r[j]);
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

EmbeddingTable read_embedding(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail("cannot open embedding file '" + path + "'");
    char magic[sizeof kBinaryMagic] = {};
    probe.read(magic, sizeof magic);
    if (probe.gcount() == sizeof magic && std::memcmp(magic, kBinaryMagic, sizeof magic) == 0) {
      std::ifstream in(path, std::ios::binary);
      in.seekg(sizeof magic);
      std::uint32_t name_len = 0;
      get(in, name_len, path);
      std::string name(name_len, '\0');
      in.read(name.data(), name_len);
      std::int64_t count = 0;
      std::int32_t dim = 0;
      get(in, count, path);
      get(in, dim, path);
      if (dim <= 0 || count < 0) fail(path + ": corrupt binary embedding header");
      EmbeddingTable table(name, dim);
      for (std::int64_t i = 0; i < count; ++i) {
        std::uint32_t id_len = 0;
        get(in, id_len, path);
        std::string id(id_len, '\0');
        in.read(id.data(), id_len);
        if (!in) fail(path + ": truncated binary embedding file");
        int row = table.add(id);
        in.read(reinterpret_cast<char*>(table.row(row).data()), sizeof(double) * dim);
        if (!in) fail(path + ": truncated binary embedding file");
      }
      return table;
    }
  }

  std::ifstream in(path);
  std::string header;
  if (!std::getline(in, header)) fail(path + ": empty embedding file");
  std::istringstream hs(header);
  std::string name;
  std::int64_t count = -1;
  int dim = 0;
  if (!(hs >> name >> count >> dim) || dim <= 0 || count < 0)
    fail(path + ":1: corrupt embedding header '" + header + "'");
  EmbeddingTable table(name, dim);
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail(path + ":" + std::to_string(lineno) + ": expected '<id>\\t<values>'");
    int row = table.add(line.substr(0, tab));
    std::istringstream vs(line.substr(tab + 1));
    auto r = table.row(row);
    for (int j = 0; j < dim; ++j)
      if (!(vs >> r[j]))
        fail(path + ":" + std::to_string(lineno) + ": row has fewer than " + std::to_string(dim) +
             " values");
    double extra;
    if (vs >> extra)
      fail(path + ":" + std::to_string(lineno) + ": row has more than " + std::to_string(dim) +
           " values");
  }
  if (table.size() != count)
    fail(path + ": header declares " + std::to_string(count) + " rows, file has " +
         std::to_string(table.size()));
  return table;
}

}  // namespace aspem
