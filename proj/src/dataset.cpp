#include "htl/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace htl {

void validate_dataset(Dataset& data, RowPolicy policy, int* clipped_labels) {
  if (data.rows() == 0) throw std::invalid_argument("dataset: empty");
  if (data.y.size() != data.rows())
    throw std::invalid_argument("dataset: label count mismatch");
  if (data.has_sources() && data.S.rows() != data.rows())
    throw std::invalid_argument("dataset: source prediction row count mismatch");
  int clipped = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double norm = data.X.row(i).norm();
    if (norm > 1.0 + 1e-12) {
      if (policy == RowPolicy::reject)
        throw std::invalid_argument("dataset: feature row " + std::to_string(i + 1) +
                                    " has norm " + std::to_string(norm) + " > 1");
      data.X.row(i) /= norm;
    }
    if (std::abs(data.y[i]) > data.C) {
      data.y[i] = data.y[i] > 0 ? data.C : -data.C;
      ++clipped;
    }
  }
  if (clipped_labels) *clipped_labels = clipped;
}

namespace {

double parse_field(const std::string& field, const std::string& path, int line,
                   int column) {
  double v{};
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw std::runtime_error(path + ":" + std::to_string(line) + ":" +
                             std::to_string(column) + ": cannot parse '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset load_dataset_csv(const std::string& path, double label_bound,
                         RowPolicy policy, int* clipped_labels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: missing header");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "y")
    throw std::runtime_error(path + ":1:1: header must start with 'y'");
  int d = 0, n = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto& h = header[i];
    if (h.size() > 1 && h[0] == 'x' && n == 0)
      ++d;
    else if (h.size() > 1 && h[0] == 's')
      ++n;
    else
      throw std::runtime_error(path + ":1:" + std::to_string(i + 1) +
                               ": unexpected column '" + h + "'");
  }

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != 1 + d + n)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(1 + d + n) +
                               " fields, got " + std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row[c] = parse_field(fields[c], path, lineno, static_cast<int>(c + 1));
    rows.push_back(std::move(row));
  }

  Dataset data;
  data.C = label_bound;
  const auto m = static_cast<Eigen::Index>(rows.size());
  data.X.resize(m, d);
  data.y.resize(m);
  if (n > 0) data.S.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    data.y[i] = rows[i][0];
    for (int j = 0; j < d; ++j) data.X(i, j) = rows[i][1 + j];
    for (int j = 0; j < n; ++j) data.S(i, j) = rows[i][1 + d + j];
  }
  validate_dataset(data, policy, clipped_labels);
  return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "y";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << ",x" << (j + 1);
  for (Eigen::Index j = 0; j < data.source_count(); ++j) out << ",s" << (j + 1);
  out << "\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
    out << buf;
  };
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    put(data.y[i], data.dim() + data.source_count() > 0 ? ',' : '\n');
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      const bool last = j + 1 == data.dim() && data.source_count() == 0;
      put(data.X(i, j), last ? '\n' : ',');
    }
    for (Eigen::Index j = 0; j < data.source_count(); ++j)
      put(data.S(i, j), j + 1 == data.source_count() ? '\n' : ',');
  }
}

}  // namespace htl
