#include "rset/dataset/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "rset/common/error.hpp"
#include "rset/common/serialize.hpp"

namespace rset {

void EmbeddingTable::add(std::string id, Eigen::VectorXd values) {
  if (ids_.empty() && dim_ == 0) dim_ = static_cast<std::size_t>(values.size());
  require(static_cast<std::size_t>(values.size()) == dim_ && dim_ > 0, ErrorKind::Shape,
          "embedding '" + id + "' has dimension " + std::to_string(values.size()) +
              ", expected " + std::to_string(dim_));
  require(values.allFinite(), ErrorKind::Numerical, "embedding '" + id + "' is not finite");
  require(!index_.contains(id), ErrorKind::InvalidArgument, "duplicate embedding id '" + id + "'");
  index_.emplace(id, rows_.size());
  ids_.push_back(std::move(id));
  rows_.push_back(std::move(values));
}

const Eigen::VectorXd& EmbeddingTable::at(const std::string& id) const {
  const auto it = index_.find(id);
  require(it != index_.end(), ErrorKind::InvalidArgument, "no embedding for utterance '" + id + "'");
  return rows_[it->second];
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open embeddings " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse,
          path.string() + ": missing header");
  const auto header = split_csv_line(line);
  require(header.size() >= 2 && header[0] == "id", ErrorKind::Parse,
          path.string() + ": header must be id,<v0>,...");
  const std::size_t dim = header.size() - 1;
  EmbeddingTable table(dim);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto f = split_csv_line(line);
    require(f.size() == header.size(), ErrorKind::Parse,
            path.string() + ": row " + std::to_string(row) + " has " + std::to_string(f.size() - 1) +
                " values, expected " + std::to_string(dim));
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k)
      require(parse_double(f[k + 1], v[static_cast<Eigen::Index>(k)]), ErrorKind::Parse,
              path.string() + ": row " + std::to_string(row) + " has a non-numeric value");
    table.add(f[0], std::move(v));
  }
  return table;
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path, char prefix) {
  std::ostringstream out;
  out << "id";
  for (std::size_t k = 0; k < table.dim(); ++k) out << ',' << prefix << k;
  out << '\n';
  for (const auto& id : table.ids()) {
    out << id;
    const auto& v = table.at(id);
    for (Eigen::Index k = 0; k < v.size(); ++k) out << ',' << format_double(v[k]);
    out << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace rset
