#include "tabfuse/blocking.hpp"

#include <algorithm>
#include <fstream>

#include "tabfuse/csv.hpp"

namespace tabfuse {

std::vector<std::string> record_texts(const Dataset& dataset,
                                      const std::vector<std::string>& template_attributes) {
  std::vector<size_t> cols;
  for (const auto& attr : template_attributes) {
    auto idx = dataset.attribute_index(attr);
    if (!idx) throw DataError("record_texts: template names unknown attribute: " + attr);
    cols.push_back(*idx);
  }
  std::vector<std::string> texts;
  texts.reserve(dataset.row_count());
  for (const auto& rec : dataset.records()) {
    std::string text;
    for (size_t i = 0; i < cols.size(); ++i) {
      const Value& v = rec.values[cols[i]];
      if (is_null(v)) continue;
      text += template_attributes[i];
      text += ": ";
      text += value_to_string(v);
      text += '\n';
    }
    texts.push_back(std::move(text));
  }
  return texts;
}

std::map<std::string, EmbeddingVector> embed_records(
    const Dataset& dataset, const std::vector<std::string>& template_attributes, Oracle& oracle) {
  auto texts = record_texts(dataset, template_attributes);
  std::map<std::string, EmbeddingVector> out;
  if (texts.empty()) return out;
  auto vectors = oracle.embed(texts);
  for (size_t i = 0; i < vectors.size(); ++i)
    out.emplace(dataset.records()[i].id, std::move(vectors[i]));
  return out;
}

namespace {

struct Side {
  std::vector<std::string> ids;
  Eigen::MatrixXf unit;  // rows are L2-normalized embeddings
};

Side build_side(const Dataset& ds, const std::map<std::string, EmbeddingVector>& vectors) {
  Side side;
  side.ids.reserve(ds.row_count());
  Eigen::Index dim = 0;
  for (const auto& rec : ds.records()) {
    auto it = vectors.find(rec.id);
    if (it == vectors.end()) throw DataError("generate_candidates: missing embedding for " + rec.id);
    if (dim == 0) dim = it->second.size();
    side.ids.push_back(rec.id);
  }
  side.unit.resize(static_cast<Eigen::Index>(side.ids.size()), dim);
  for (Eigen::Index r = 0; r < side.unit.rows(); ++r) {
    const auto& v = vectors.at(side.ids[static_cast<size_t>(r)]);
    const float n = v.norm();
    if (n == 0.0f)
      side.unit.row(r) = v.transpose();
    else
      side.unit.row(r) = (v / n).transpose();
  }
  return side;
}

}  // namespace

std::vector<CandidatePair> generate_candidates(
    const Dataset& a, const std::map<std::string, EmbeddingVector>& a_vectors, const Dataset& b,
    const std::map<std::string, EmbeddingVector>& b_vectors, int k) {
  if (k < 1) throw ConfigError("generate_candidates: k must be >= 1");
  if (a.name() == b.name()) throw ConfigError("generate_candidates: datasets must differ");
  if (a.row_count() == 0 || b.row_count() == 0) return {};

  const bool swap = a.name() > b.name();
  const Dataset& first = swap ? b : a;
  const Dataset& second = swap ? a : b;
  Side left = build_side(first, swap ? b_vectors : a_vectors);
  Side right = build_side(second, swap ? a_vectors : b_vectors);

  struct Hit {
    double sim;
    int rank;
  };
  std::map<std::pair<size_t, size_t>, Hit> pool;  // (left row, right row)

  // blockwise scan keeps memory linear in pool size
  constexpr Eigen::Index kBlock = 256;
  auto scan = [&](const Side& query, const Side& base, bool query_is_left) {
    const int kk = std::min<int>(k, static_cast<int>(base.ids.size()));
    for (Eigen::Index start = 0; start < query.unit.rows(); start += kBlock) {
      const Eigen::Index rows = std::min(kBlock, query.unit.rows() - start);
      Eigen::MatrixXf sims = query.unit.middleRows(start, rows) * base.unit.transpose();
      for (Eigen::Index r = 0; r < rows; ++r) {
        std::vector<int> order(static_cast<size_t>(base.unit.rows()));
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::partial_sort(order.begin(), order.begin() + kk, order.end(),
                          [&](int x, int y) {
                            const float sx = sims(r, x), sy = sims(r, y);
                            if (sx != sy) return sx > sy;
                            return base.ids[static_cast<size_t>(x)] <
                                   base.ids[static_cast<size_t>(y)];
                          });
        for (int rank = 0; rank < kk; ++rank) {
          const size_t q = static_cast<size_t>(start + r);
          const size_t t = static_cast<size_t>(order[static_cast<size_t>(rank)]);
          const auto key = query_is_left ? std::make_pair(q, t) : std::make_pair(t, q);
          const Hit hit{static_cast<double>(sims(r, order[static_cast<size_t>(rank)])), rank + 1};
          auto [it, inserted] = pool.emplace(key, hit);
          if (!inserted && hit.rank < it->second.rank) it->second.rank = hit.rank;
        }
      }
    }
  };
  scan(left, right, true);
  scan(right, left, false);

  std::vector<CandidatePair> out;
  out.reserve(pool.size());
  for (const auto& [key, hit] : pool) {
    CandidatePair p;
    p.a = {first.name(), left.ids[key.first]};
    p.b = {second.name(), right.ids[key.second]};
    p.similarity = hit.sim;
    p.rank_from_a = hit.rank;
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const CandidatePair& x, const CandidatePair& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    if (x.a.id != y.a.id) return x.a.id < y.a.id;
    return x.b.id < y.b.id;
  });
  return out;
}

void save_candidates(const std::vector<CandidatePair>& pool, const std::string& path) {
  CsvTable t;
  t.header = {"id_a", "id_b", "similarity", "rank"};
  for (const auto& p : pool)
    t.rows.push_back({p.a.id, p.b.id, format_double(p.similarity), std::to_string(p.rank_from_a)});
  write_csv(path, t);
}

std::vector<CandidatePair> load_candidates(const std::string& path, const std::string& dataset_a,
                                           const std::string& dataset_b) {
  CsvTable t = read_csv(path);
  std::vector<CandidatePair> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    CandidatePair p;
    p.a = {dataset_a, row.at(0)};
    p.b = {dataset_b, row.at(1)};
    p.similarity = std::stod(row.at(2));
    p.rank_from_a = row.size() > 3 ? std::stoi(row.at(3)) : 0;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tabfuse
