#include "fairflip/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fairflip/rng.hpp"

namespace fairflip {

namespace {

std::string to_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool is_missing(const std::string& cell) {
  if (cell.empty()) return true;
  if (cell.size() > 4) return false;
  std::string up;
  up.reserve(cell.size());
  for (char c : cell) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return up == "NA" || up == "NULL";
}

// RFC-4180 style: comma separated, optional double-quote quoting with ""
// escapes, LF or CRLF record ends. Returns one record per call.
class CsvReader {
 public:
  explicit CsvReader(const std::string& text) : text_(text) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string cell;
    bool in_quotes = false;
    bool any = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            cell.push_back('"');
            pos_ += 2;
          } else {
            in_quotes = false;
            ++pos_;
          }
        } else {
          cell.push_back(c);
          ++pos_;
        }
        continue;
      }
      if (c == '"' && cell.empty()) {
        in_quotes = true;
        any = true;
        ++pos_;
      } else if (c == ',') {
        fields.push_back(std::move(cell));
        cell.clear();
        any = true;
        ++pos_;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
        fields.push_back(std::move(cell));
        return true;
      } else {
        cell.push_back(c);
        any = true;
        ++pos_;
      }
    }
    if (any || !cell.empty() || !fields.empty()) {
      fields.push_back(std::move(cell));
      return true;
    }
    return false;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  // Tolerate a leading '+' which from_chars rejects.
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    raise(ErrorKind::Data, "row " + std::to_string(row) + ", column '" + col +
                               "': cannot parse '" + cell + "' as a finite real");
  }
  return v;
}

}  // namespace

GroupStats LabeledDataset::group_stats() const {
  GroupStats s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (group[i] == Group::Adv) {
      ++s.n_w;
      if (labels[i] > 0) ++s.p_w;
    } else {
      ++s.n_b;
      if (labels[i] > 0) ++s.p_b;
    }
  }
  return s;
}

void LabeledDataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n || group.size() != n)
    raise(ErrorKind::InvalidArgument, "dataset row counts disagree");
  if (column_names.size() != features.cols())
    raise(ErrorKind::InvalidArgument, "column name count does not match feature count");
  for (std::int8_t y : labels)
    if (y != 1 && y != -1) raise(ErrorKind::InvalidArgument, "labels must be +1 or -1");
  const GroupStats s = group_stats();
  if (s.n_w == 0 || s.n_b == 0)
    raise(ErrorKind::Data, "degenerate partition: a group has no rows");
  std::set<std::size_t> seen;
  for (std::size_t m : merit_columns) {
    if (m >= features.cols()) raise(ErrorKind::InvalidArgument, "merit column index out of range");
    if (!seen.insert(m).second) raise(ErrorKind::InvalidArgument, "duplicate merit column");
  }
}

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_csv_text(ss.str(), schema);
}

LabeledDataset load_csv_text(const std::string& text, const CsvSchema& schema) {
  CsvReader reader(text);
  std::vector<std::string> header;
  if (!reader.next(header)) raise(ErrorKind::Schema, "empty CSV: missing header row");

  auto find_col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      raise(ErrorKind::Schema, "missing column '" + name + "' in CSV header");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t group_idx = find_col(schema.group_column);
  const std::size_t label_idx = find_col(schema.label_column);
  if (group_idx == label_idx)
    raise(ErrorKind::Schema, "group and label columns must differ");

  std::vector<std::size_t> feature_idx;
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == group_idx || j == label_idx) continue;
    feature_idx.push_back(j);
    feature_names.push_back(header[j]);
  }

  std::vector<std::size_t> merit_cols;
  for (const auto& name : schema.merit_columns) {
    if (name == schema.group_column || name == schema.label_column)
      raise(ErrorKind::Schema, "merit column '" + name + "' clashes with a designated column");
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end())
      raise(ErrorKind::Schema, "missing column '" + name + "' in CSV header");
    const std::size_t idx = static_cast<std::size_t>(it - feature_names.begin());
    if (std::find(merit_cols.begin(), merit_cols.end(), idx) != merit_cols.end())
      raise(ErrorKind::Schema, "duplicate merit column '" + name + "'");
    merit_cols.push_back(idx);
  }

  struct RawRow {
    std::vector<double> x;
    std::int8_t y;
    bool cat_a;
  };
  std::vector<RawRow> rows;
  std::set<std::string> label_values;
  std::size_t dropped = 0;
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (reader.next(fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank trailing line
    if (fields.size() != header.size())
      raise(ErrorKind::Data, "row " + std::to_string(line) + ": expected " +
                                 std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
    const std::string& gcell = fields[group_idx];
    const std::string& lcell = fields[label_idx];
    bool drop = is_missing(gcell) || is_missing(lcell);
    if (!drop && gcell != schema.category_a && gcell != schema.category_b) {
      // Rows outside the designated pair of categories are excluded, counted.
      drop = true;
    }
    if (!drop) {
      for (std::size_t k = 0; k < feature_idx.size() && !drop; ++k)
        if (is_missing(fields[feature_idx[k]])) drop = true;
    }
    if (drop) {
      ++dropped;
      continue;
    }
    label_values.insert(lcell);
    RawRow r;
    r.cat_a = (gcell == schema.category_a);
    r.y = (lcell == schema.positive_value) ? std::int8_t{1} : std::int8_t{-1};
    r.x.resize(feature_idx.size());
    for (std::size_t k = 0; k < feature_idx.size(); ++k)
      r.x[k] = parse_cell(fields[feature_idx[k]], line, feature_names[k]);
    rows.push_back(std::move(r));
  }

  if (label_values.size() > 2) {
    std::string msg = "label column '" + schema.label_column + "' has more than two values: {";
    bool first = true;
    for (const auto& v : label_values) {
      if (!first) msg += ", ";
      msg += "'" + v + "'";
      first = false;
    }
    msg += "}; expected '" + schema.positive_value + "' plus one other";
    raise(ErrorKind::Data, msg);
  }
  std::string negative_value = "-1";
  for (const auto& v : label_values)
    if (v != schema.positive_value) negative_value = v;

  // Orient the ADV/DIS tags by measured positive rate; ties go to category_a.
  std::size_t n_a = 0, p_a = 0, n_b = 0, p_b = 0;
  for (const auto& r : rows) {
    if (r.cat_a) {
      ++n_a;
      if (r.y > 0) ++p_a;
    } else {
      ++n_b;
      if (r.y > 0) ++p_b;
    }
  }
  if (n_a == 0 || n_b == 0)
    raise(ErrorKind::Data, "degenerate partition: group '" +
                               (n_a == 0 ? schema.category_a : schema.category_b) +
                               "' has no rows after dropping");
  // Compare p_a/n_a vs p_b/n_b exactly with integer cross products.
  const bool a_is_adv = p_a * n_b >= p_b * n_a;

  LabeledDataset ds;
  ds.features = Matrix(rows.size(), feature_idx.size());
  ds.labels.resize(rows.size());
  ds.group.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < feature_idx.size(); ++k) ds.features(i, k) = rows[i].x[k];
    ds.labels[i] = rows[i].y;
    ds.group[i] = (rows[i].cat_a == a_is_adv) ? Group::Adv : Group::Dis;
  }
  ds.column_names = feature_names;
  ds.merit_columns = merit_cols;
  ds.adv_category = a_is_adv ? schema.category_a : schema.category_b;
  ds.dis_category = a_is_adv ? schema.category_b : schema.category_a;
  ds.negative_value = negative_value;
  ds.schema = schema;
  ds.dropped_rows = dropped;
  ds.validate();
  return ds;
}

std::string write_csv_text(const LabeledDataset& ds) {
  std::string out;
  const CsvSchema& sc = ds.schema;
  out += quote_if_needed(sc.group_column.empty() ? "group" : sc.group_column);
  out += ',';
  out += quote_if_needed(sc.label_column.empty() ? "label" : sc.label_column);
  for (const auto& name : ds.column_names) {
    out += ',';
    out += quote_if_needed(name);
  }
  out += '\n';
  const Matrix& x = ds.raw_features();
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    out += quote_if_needed(ds.group[i] == Group::Adv ? ds.adv_category : ds.dis_category);
    out += ',';
    const std::string pos = sc.positive_value.empty() ? "1" : sc.positive_value;
    out += quote_if_needed(ds.labels[i] > 0 ? pos : ds.negative_value);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out += ',';
      out += to_shortest(x(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write '" + path + "'");
  out << write_csv_text(ds);
}

std::pair<LabeledDataset, StandardizationParams> standardize_by_group(const LabeledDataset& ds) {
  ds.validate();
  const Matrix& x = ds.features;
  const std::size_t n = ds.num_rows();
  const std::size_t p = ds.num_features();
  StandardizationParams params;
  for (auto& v : params.per_group) v.resize(p);

  for (int g = 0; g < 2; ++g) {
    const Group tag = static_cast<Group>(g);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (ds.group[i] == tag) idx.push_back(i);
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0.0;
      for (std::size_t i : idx) mean += x(i, j);
      mean /= static_cast<double>(idx.size());
      double ss = 0.0;
      for (std::size_t i : idx) {
        const double d = x(i, j) - mean;
        ss += d * d;
      }
      const double sd = idx.size() > 1 ? std::sqrt(ss / static_cast<double>(idx.size() - 1)) : 0.0;
      if (!(sd > 1e-12)) {
        raise(ErrorKind::Data, "column '" + ds.column_names[j] + "' is constant within group " +
                                   (tag == Group::Adv ? ds.adv_category : ds.dis_category));
      }
      params.per_group[g][j] = {mean, sd};
    }
  }

  LabeledDataset out = ds;
  out.raw_copy = ds.raw_features();
  Matrix z(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cols = params.per_group[static_cast<std::size_t>(ds.group[i])];
    for (std::size_t j = 0; j < p; ++j) z(i, j) = (x(i, j) - cols[j].mean) / cols[j].stddev;
  }
  out.features = std::move(z);
  out.standardized = true;
  out.std_params = params;
  return {std::move(out), params};
}

BiasReport alpha_bias(const LabeledDataset& ds) {
  ds.validate();
  const GroupStats s = ds.group_stats();
  // |p_w/n_w - p_b/n_b| with a single division to keep the value exact in
  // the rational sense.
  const long long num = static_cast<long long>(s.p_w) * static_cast<long long>(s.n_b) -
                        static_cast<long long>(s.p_b) * static_cast<long long>(s.n_w);
  BiasReport r;
  r.stats = s;
  r.higher_rate = num >= 0 ? Group::Adv : Group::Dis;
  r.alpha = std::abs(static_cast<double>(num)) /
            (static_cast<double>(s.n_w) * static_cast<double>(s.n_b));
  return r;
}

double parity_gap(const std::vector<std::int8_t>& predictions, const std::vector<Group>& group) {
  if (predictions.size() != group.size())
    raise(ErrorKind::InvalidArgument, "prediction length does not match partition length");
  long long n_w = 0, n_b = 0, p_w = 0, p_b = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (group[i] == Group::Adv) {
      ++n_w;
      if (predictions[i] > 0) ++p_w;
    } else {
      ++n_b;
      if (predictions[i] > 0) ++p_b;
    }
  }
  if (n_w == 0 || n_b == 0) raise(ErrorKind::Data, "degenerate partition in parity_gap");
  const long long num = p_w * n_b - p_b * n_w;
  return std::abs(static_cast<double>(num)) / (static_cast<double>(n_w) * static_cast<double>(n_b));
}

std::vector<double> merit_means(const LabeledDataset& ds) {
  ds.validate();
  const GroupStats s = ds.group_stats();
  const std::size_t pos = s.p_w + s.p_b;
  if (pos == 0) raise(ErrorKind::Data, "merit means undefined: no positively labeled rows");
  std::vector<double> out;
  out.reserve(ds.merit_columns.size());
  for (std::size_t j : ds.merit_columns) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.num_rows(); ++i)
      sum += ds.features(i, j) * (static_cast<double>(ds.labels[i]) + 1.0);
    out.push_back(sum / (2.0 * static_cast<double>(pos)));
  }
  return out;
}

SyntheticDataset generate_synthetic(std::size_t n, std::size_t p, double alpha_target,
                                    double group_fraction, std::uint64_t seed) {
  if (n < 4) raise(ErrorKind::InvalidArgument, "generate_synthetic requires n >= 4");
  if (p < 1) raise(ErrorKind::InvalidArgument, "generate_synthetic requires p >= 1");
  if (!(alpha_target >= 0.0 && alpha_target < 1.0))
    raise(ErrorKind::InvalidArgument, "alpha_target must lie in [0, 1)");
  if (!(group_fraction > 0.0 && group_fraction < 1.0))
    raise(ErrorKind::InvalidArgument, "group_fraction must lie in (0, 1)");

  Rng rng(seed);
  std::vector<bool> in_a(n);
  for (std::size_t i = 0; i < n; ++i) in_a[i] = rng.uniform() < group_fraction;
  // Both groups must be populated; nudge the first rows if a draw came up empty.
  if (std::find(in_a.begin(), in_a.end(), true) == in_a.end()) in_a[0] = true;
  if (std::find(in_a.begin(), in_a.end(), false) == in_a.end()) in_a[0] = false;

  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.normal();

  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = rng.normal() * 1.5 / std::sqrt(static_cast<double>(p));
  const double beta0 = 0.0;

  std::vector<double> score(n), u(n);
  for (std::size_t i = 0; i < n; ++i) {
    score[i] = beta0 + dot_row(x, i, beta);
    u[i] = rng.uniform();
  }

  auto realize = [&](double shift, std::vector<std::int8_t>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = score[i] + (in_a[i] ? 0.5 : -0.5) * shift;
      const double prob = 1.0 / (1.0 + std::exp(-s));
      y[i] = u[i] < prob ? std::int8_t{1} : std::int8_t{-1};
    }
  };
  auto signed_gap = [&](const std::vector<std::int8_t>& y) {
    long long n_a = 0, n_b = 0, p_a = 0, p_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_a[i]) {
        ++n_a;
        if (y[i] > 0) ++p_a;
      } else {
        ++n_b;
        if (y[i] > 0) ++p_b;
      }
    }
    return static_cast<double>(p_a * n_b - p_b * n_a) /
           (static_cast<double>(n_a) * static_cast<double>(n_b));
  };

  std::vector<std::int8_t> y(n);
  double lo = -16.0, hi = 16.0, shift = 0.0;
  realize(0.0, y);
  double achieved = signed_gap(y);
  bool ok = std::abs(achieved - alpha_target) <= 0.02;
  for (int step = 0; step < 100 && !ok; ++step) {
    shift = 0.5 * (lo + hi);
    realize(shift, y);
    achieved = signed_gap(y);
    if (std::abs(achieved - alpha_target) <= 0.02) {
      ok = true;
      break;
    }
    if (achieved < alpha_target) lo = shift;
    else hi = shift;
  }
  if (!ok) {
    raise(ErrorKind::Data, "synthetic calibration failed after 100 bisection steps: achieved alpha " +
                               std::to_string(std::abs(achieved)) + " for target " +
                               std::to_string(alpha_target));
  }

  LabeledDataset ds;
  ds.features = std::move(x);
  ds.labels = y;
  ds.group.resize(n);
  // ADV is whichever category realizes the higher positive rate, like load_csv.
  const bool a_is_adv = achieved >= 0.0;
  for (std::size_t i = 0; i < n; ++i)
    ds.group[i] = (in_a[i] == a_is_adv) ? Group::Adv : Group::Dis;
  ds.column_names.resize(p);
  for (std::size_t j = 0; j < p; ++j) ds.column_names[j] = "x" + std::to_string(j + 1);
  ds.adv_category = a_is_adv ? "A" : "B";
  ds.dis_category = a_is_adv ? "B" : "A";
  ds.negative_value = "-1";
  ds.schema.group_column = "group";
  ds.schema.category_a = ds.adv_category;
  ds.schema.category_b = ds.dis_category;
  ds.schema.label_column = "label";
  ds.schema.positive_value = "1";
  ds.validate();

  SyntheticDataset out;
  out.dataset = std::move(ds);
  out.truth.beta = std::move(beta);
  out.truth.beta0 = beta0;
  out.truth.shift = shift;
  out.truth.realized_alpha = std::abs(achieved);
  out.truth.seed = seed;
  return out;
}

}  // namespace fairflip
