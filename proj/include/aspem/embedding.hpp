#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace aspem {

// Fixed-dimension vectors keyed by external node id, one table per aspect.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string aspect_name, int dim);

  int add(const std::string& id);            // new zero row; throws on duplicate
  int find(const std::string& id) const;     // -1 if absent
  std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)}; }
  std::span<const double> row(int i) const { return {data_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)}; }
  const std::string& id(int i) const { return ids_[i]; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(ids_.size()); }
  const std::string& aspect_name() const { return aspect_name_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  bool all_finite() const;

 private:
  std::string aspect_name_;
  int dim_ = 0;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> data_;
};

// Text: header "<aspect> <count> <dim>", rows "<id>\t<v1> <v2> ..." with
// 9 significant digits. Binary carries the same logical content exactly.
void write_embedding(const EmbeddingTable& table, const std::string& path, bool binary = false);
EmbeddingTable read_embedding(const std::string& path);  // sniffs binary magic

}  // namespace aspem
