#include "fairflip/fairflip.h"

#include <charconv>
#include <cstring>
#include <new>
#include <string>

#include "fairflip/classifiers.hpp"
#include "fairflip/data_model.hpp"
#include "fairflip/explain_tree.hpp"
#include "fairflip/flip_optimizer.hpp"
#include "fairflip/model_io.hpp"
#include "fairflip/rng.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

constexpr const char* kSpecVersion = "1.0";

thread_local std::string g_last_error;

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

int code_for(fairflip::ErrorKind kind) {
  switch (kind) {
    case fairflip::ErrorKind::InvalidArgument: return FF_ERR_INVALID_ARGUMENT;
    case fairflip::ErrorKind::Schema: return FF_ERR_SCHEMA;
    case fairflip::ErrorKind::Data: return FF_ERR_DATA;
    case fairflip::ErrorKind::Solve: return FF_ERR_SOLVE;
    case fairflip::ErrorKind::Io: return FF_ERR_IO;
    case fairflip::ErrorKind::Size: return FF_ERR_SIZE;
  }
  return FF_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const fairflip::Error& e) {
    return set_error(code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return set_error(FF_ERR_INVALID_ARGUMENT, e.what());
  } catch (...) {
    return set_error(FF_ERR_INVALID_ARGUMENT, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

fairflip::CsvSchema schema_from_json(const char* text) {
  if (!text) fairflip::raise(fairflip::ErrorKind::Schema, "schema JSON is required");
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fairflip::raise(fairflip::ErrorKind::Schema, std::string("schema JSON parse failure: ") + e.what());
  }
  fairflip::CsvSchema schema;
  try {
    schema.group_column = j.at("group_column").get<std::string>();
    schema.category_a = j.at("category_a").get<std::string>();
    schema.category_b = j.at("category_b").get<std::string>();
    schema.label_column = j.at("label_column").get<std::string>();
    schema.positive_value = j.at("positive_value").get<std::string>();
    if (j.contains("merit_columns"))
      schema.merit_columns = j.at("merit_columns").get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    fairflip::raise(fairflip::ErrorKind::Schema, std::string("schema JSON structure error: ") + e.what());
  }
  if (schema.category_a == schema.category_b)
    fairflip::raise(fairflip::ErrorKind::Schema, "the two group categories must differ");
  return schema;
}

struct DebiasOptions {
  double epsilon = 0.01;
  double delta = fairflip::kLpInfinity;
  fairflip::ModelKind kind = fairflip::ModelKind::Logistic;
  fairflip::DebiasConfig config;
};

DebiasOptions options_from_json(const char* text) {
  DebiasOptions opt;
  if (!text || !*text) return opt;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fairflip::raise(fairflip::ErrorKind::InvalidArgument,
                    std::string("options JSON parse failure: ") + e.what());
  }
  if (j.contains("epsilon")) opt.epsilon = j.at("epsilon").get<double>();
  if (j.contains("delta")) opt.delta = j.at("delta").get<double>();
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "logistic") opt.kind = fairflip::ModelKind::Logistic;
    else if (kind == "svm") opt.kind = fairflip::ModelKind::Svm;
    else fairflip::raise(fairflip::ErrorKind::InvalidArgument, "kind must be 'logistic' or 'svm'");
  }
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "alternating") opt.config.svm_mode = fairflip::SvmMode::Alternating;
    else if (mode == "exact_enum") opt.config.svm_mode = fairflip::SvmMode::ExactEnum;
    else fairflip::raise(fairflip::ErrorKind::InvalidArgument,
                         "mode must be 'alternating' or 'exact_enum'");
  }
  if (j.contains("C")) opt.config.svm_c = j.at("C").get<double>();
  if (j.contains("lambda")) opt.config.ridge_lambda = j.at("lambda").get<double>();
  if (j.contains("gap_tol")) opt.config.gap_tol = j.at("gap_tol").get<double>();
  if (j.contains("max_iter")) opt.config.max_iter = j.at("max_iter").get<std::size_t>();
  if (j.contains("big_m")) opt.config.big_m = j.at("big_m").get<double>();
  if (j.contains("directional")) opt.config.directional = j.at("directional").get<bool>();
  if (j.contains("max_rounds")) opt.config.max_rounds = j.at("max_rounds").get<std::size_t>();
  if (j.contains("node_limit")) opt.config.node_limit = j.at("node_limit").get<std::size_t>();
  return opt;
}

json group_values_json(const fairflip::LabeledDataset& ds) {
  return json{{"ADV", ds.adv_category}, {"DIS", ds.dis_category}};
}

}  // namespace

struct ff_dataset {
  fairflip::LabeledDataset ds;
};

struct ff_model {
  fairflip::AnyModel model;
};

struct ff_result {
  fairflip::DebiasResult result;
  double delta = fairflip::kLpInfinity;
  double epsilon = 0.0;
  fairflip::ModelKind kind = fairflip::ModelKind::Logistic;
  fairflip::SvmMode mode = fairflip::SvmMode::Alternating;
};

extern "C" {

const char* ff_version(void) { return "0.1.0"; }

const char* ff_last_error(void) { return g_last_error.c_str(); }

void ff_string_free(char* s) { delete[] s; }

int ff_dataset_load_csv(const char* path, const char* schema_json, ff_dataset** out) {
  return guarded([&]() -> int {
    if (!path || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    auto handle = std::make_unique<ff_dataset>();
    handle->ds = fairflip::load_csv(path, schema_from_json(schema_json));
    *out = handle.release();
    return FF_OK;
  });
}

int ff_dataset_from_csv_text(const char* text, const char* schema_json, ff_dataset** out) {
  return guarded([&]() -> int {
    if (!text || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    auto handle = std::make_unique<ff_dataset>();
    handle->ds = fairflip::load_csv_text(text, schema_from_json(schema_json));
    *out = handle.release();
    return FF_OK;
  });
}

int ff_dataset_synthetic(size_t n, size_t p, double alpha_target, double group_fraction,
                         uint64_t seed, ff_dataset** out, char** planted_json) {
  return guarded([&]() -> int {
    if (!out) return set_error(FF_ERR_INVALID_ARGUMENT, "null output");
    fairflip::SyntheticDataset synth =
        fairflip::generate_synthetic(n, p, alpha_target, group_fraction, seed);
    if (planted_json) {
      json j;
      j["spec_version"] = kSpecVersion;
      j["beta"] = synth.truth.beta;
      j["beta0"] = synth.truth.beta0;
      j["shift"] = synth.truth.shift;
      j["realized_alpha"] = synth.truth.realized_alpha;
      j["seed"] = synth.truth.seed;
      j["n"] = n;
      j["p"] = p;
      *planted_json = dup_string(j.dump(2));
    }
    auto handle = std::make_unique<ff_dataset>();
    handle->ds = std::move(synth.dataset);
    *out = handle.release();
    return FF_OK;
  });
}

int ff_dataset_write_csv_text(const ff_dataset* ds, char** csv) {
  return guarded([&]() -> int {
    if (!ds || !csv) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    *csv = dup_string(fairflip::write_csv_text(ds->ds));
    return FF_OK;
  });
}

int ff_dataset_num_rows(const ff_dataset* ds, size_t* out) {
  if (!ds || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
  *out = ds->ds.num_rows();
  return FF_OK;
}

int ff_dataset_num_features(const ff_dataset* ds, size_t* out) {
  if (!ds || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
  *out = ds->ds.num_features();
  return FF_OK;
}

int ff_dataset_dropped_rows(const ff_dataset* ds, size_t* out) {
  if (!ds || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
  *out = ds->ds.dropped_rows;
  return FF_OK;
}

void ff_dataset_free(ff_dataset* ds) { delete ds; }

int ff_measure(const ff_dataset* ds, char** report_json) {
  return guarded([&]() -> int {
    if (!ds || !report_json) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const fairflip::BiasReport report = fairflip::alpha_bias(ds->ds);
    json j;
    j["spec_version"] = kSpecVersion;
    j["alpha"] = report.alpha;
    j["higher_rate_group"] = report.higher_rate == fairflip::Group::Adv ? ds->ds.adv_category
                                                                        : ds->ds.dis_category;
    j["group_values"] = group_values_json(ds->ds);
    j["n_adv"] = report.stats.n_w;
    j["n_dis"] = report.stats.n_b;
    j["pos_adv"] = report.stats.p_w;
    j["pos_dis"] = report.stats.p_b;
    j["pos_rate_adv"] = report.stats.pos_rate_w();
    j["pos_rate_dis"] = report.stats.pos_rate_b();
    j["dropped_rows"] = ds->ds.dropped_rows;
    *report_json = dup_string(j.dump(2));
    return FF_OK;
  });
}

int ff_debias(const ff_dataset* ds, const char* options_json, ff_result** out) {
  return guarded([&]() -> int {
    if (!ds || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const DebiasOptions opt = options_from_json(options_json);
    auto handle = std::make_unique<ff_result>();
    handle->result = fairflip::debias(ds->ds, opt.epsilon, opt.delta, opt.kind, opt.config);
    handle->delta = opt.delta;
    handle->epsilon = opt.epsilon;
    handle->kind = opt.kind;
    handle->mode = opt.config.svm_mode;
    *out = handle.release();
    return FF_OK;
  });
}

int ff_result_json(const ff_result* result, char** out) {
  return guarded([&]() -> int {
    if (!result || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const fairflip::DebiasResult& r = result->result;
    json j;
    j["spec_version"] = kSpecVersion;
    j["kind"] = result->kind == fairflip::ModelKind::Logistic ? "logistic" : "svm";
    if (result->kind == fairflip::ModelKind::Svm)
      j["mode"] = result->mode == fairflip::SvmMode::ExactEnum ? "exact_enum" : "alternating";
    j["epsilon"] = result->epsilon;
    if (std::isfinite(result->delta)) j["delta"] = result->delta;
    j["budget"] = {{"tau_w", r.budget.tau_w},
                   {"tau_b", r.budget.tau_b},
                   {"k_w", r.budget.k_w},
                   {"k_b", r.budget.k_b},
                   {"directional", r.budget.directional}};
    j["objective"] = r.assignment.objective_value;
    j["iterations"] = r.iterations;
    json trace = json::array();
    for (const auto& [lower, upper] : r.bound_trace) trace.push_back({lower, upper});
    j["bound_trace"] = std::move(trace);
    j["achieved_parity"] = r.achieved_parity;
    j["gap_limit"] = r.gap_limit;
    j["exact"] = r.exact;
    j["final_gap"] = r.final_gap;
    std::size_t flips = 0;
    for (auto z : r.assignment.z) flips += z;
    j["flipped_rows"] = flips;
    json deltas = json::object();
    const fairflip::AnyModel& model = r.model;
    const std::vector<std::string>& cols = std::holds_alternative<fairflip::LogisticModel>(model)
                                               ? std::get<fairflip::LogisticModel>(model).columns
                                               : std::get<fairflip::SvmModel>(model).columns;
    (void)cols;
    j["merit_deltas"] = r.merit_deltas;
    j["model"] = json::parse(fairflip::model_to_json(r.model));
    *out = dup_string(j.dump(2));
    return FF_OK;
  });
}

int ff_result_flips_csv(const ff_result* result, const ff_dataset* ds, char** csv) {
  return guarded([&]() -> int {
    if (!result || !ds || !csv) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const fairflip::LabeledDataset& d = ds->ds;
    const fairflip::DebiasResult& r = result->result;
    if (r.assignment.z.size() != d.num_rows())
      return set_error(FF_ERR_INVALID_ARGUMENT, "result does not match the dataset");
    std::string out = "row_index,group,original_label,new_label,flipped";
    for (std::size_t m : d.merit_columns) out += "," + d.column_names[m];
    out += "\n";
    const fairflip::Matrix& raw = d.raw_features();
    for (std::size_t i = 0; i < d.num_rows(); ++i) {
      out += std::to_string(i);
      out += ",";
      out += d.group[i] == fairflip::Group::Adv ? d.adv_category : d.dis_category;
      out += ",";
      out += d.labels[i] > 0 ? "1" : "-1";
      out += ",";
      out += r.assignment.y_tilde[i] > 0 ? "1" : "-1";
      out += ",";
      out += r.assignment.z[i] ? "1" : "0";
      for (std::size_t m : d.merit_columns) {
        out += ",";
        out += shortest(raw(i, m));
      }
      out += "\n";
    }
    *csv = dup_string(out);
    return FF_OK;
  });
}

int ff_result_model(const ff_result* result, ff_model** out) {
  return guarded([&]() -> int {
    if (!result || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    auto handle = std::make_unique<ff_model>();
    handle->model = result->result.model;
    *out = handle.release();
    return FF_OK;
  });
}

void ff_result_free(ff_result* result) { delete result; }

int ff_tradeoff(const ff_dataset* ds, const char* options_json, char** csv) {
  return guarded([&]() -> int {
    if (!ds || !csv) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const DebiasOptions opt = options_from_json(options_json);
    std::vector<double> grid;
    if (options_json && *options_json) {
      const json j = json::parse(options_json);
      if (j.contains("epsilon_grid")) grid = j.at("epsilon_grid").get<std::vector<double>>();
    }
    if (grid.empty()) {
      const fairflip::BiasReport report = fairflip::alpha_bias(ds->ds);
      grid = fairflip::default_epsilon_grid(report.alpha);
    }
    const auto rows = fairflip::tradeoff_sweep(ds->ds, grid, opt.delta, opt.kind, opt.config);
    std::string out = "epsilon,column,delta_change,status\n";
    for (const auto& row : rows) {
      out += shortest(row.epsilon);
      out += ",";
      out += row.column;
      out += ",";
      out += shortest(row.delta_change);
      out += ",";
      std::string status = row.status;
      for (char& c : status)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
      out += status;
      out += "\n";
    }
    *csv = dup_string(out);
    return FF_OK;
  });
}

int ff_explain(const ff_dataset* ds, const char* flips_csv, const char* options_json,
               char** report_json) {
  return guarded([&]() -> int {
    if (!ds || !flips_csv || !report_json)
      return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const fairflip::LabeledDataset& d = ds->ds;
    const std::size_t n = d.num_rows();

    std::uint64_t seed = 0;
    double split_fraction = 0.7;
    std::size_t folds = 5;
    std::size_t min_leaf = 5;
    if (options_json && *options_json) {
      const json j = json::parse(options_json);
      if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("split_fraction")) split_fraction = j.at("split_fraction").get<double>();
      if (j.contains("folds")) folds = j.at("folds").get<std::size_t>();
      if (j.contains("min_leaf")) min_leaf = j.at("min_leaf").get<std::size_t>();
    }
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
      fairflip::raise(fairflip::ErrorKind::InvalidArgument,
                      "split_fraction must lie in (0, 1)");

    // Parse the flip report back into per-row classes and flipped labels.
    std::vector<fairflip::FlipClass> classes(n, fairflip::FlipClass::NoChange);
    std::vector<std::int8_t> y_tilde = d.labels;
    {
      std::string text(flips_csv);
      std::size_t pos = 0;
      auto next_line = [&](std::string& line) {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        return true;
      };
      std::string line;
      if (!next_line(line))
        fairflip::raise(fairflip::ErrorKind::Data, "flip report is empty");
      std::size_t seen = 0;
      while (next_line(line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t field_pos = 0;
        while (true) {
          const std::size_t comma = line.find(',', field_pos);
          if (comma == std::string::npos) {
            fields.push_back(line.substr(field_pos));
            break;
          }
          fields.push_back(line.substr(field_pos, comma - field_pos));
          field_pos = comma + 1;
        }
        if (fields.size() < 5)
          fairflip::raise(fairflip::ErrorKind::Data, "flip report row has too few fields");
        const std::size_t idx = std::stoul(fields[0]);
        if (idx >= n)
          fairflip::raise(fairflip::ErrorKind::Data, "flip report row index out of range");
        const int new_label = std::stoi(fields[3]);
        const int flipped = std::stoi(fields[4]);
        if (flipped) {
          y_tilde[idx] = static_cast<std::int8_t>(new_label >= 0 ? 1 : -1);
          classes[idx] = new_label >= 0 ? fairflip::FlipClass::Positive
                                        : fairflip::FlipClass::Negative;
        }
        ++seen;
      }
      if (seen != n)
        fairflip::raise(fairflip::ErrorKind::Data,
                        "flip report covers " + std::to_string(seen) + " rows, dataset has " +
                            std::to_string(n));
    }

    auto [x, names] = fairflip::tree_features(d);

    // Stratified train/test split, deterministic in the seed.
    fairflip::Rng rng(seed);
    std::vector<char> in_train(n, 0);
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (static_cast<std::size_t>(classes[i]) == c) members.push_back(i);
      rng.shuffle(members);
      const std::size_t train_count =
          static_cast<std::size_t>(std::round(split_fraction * static_cast<double>(members.size())));
      for (std::size_t i = 0; i < members.size(); ++i) in_train[members[i]] = i < train_count;
    }
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train_rows : test_rows).push_back(i);
    if (train_rows.size() < folds * min_leaf || test_rows.empty())
      fairflip::raise(fairflip::ErrorKind::Data, "dataset too small for the requested split");

    fairflip::Matrix xt(train_rows.size(), x.cols());
    std::vector<fairflip::FlipClass> ct(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      for (std::size_t j = 0; j < x.cols(); ++j) xt(r, j) = x(train_rows[r], j);
      ct[r] = classes[train_rows[r]];
    }

    const fairflip::CvReport cv = fairflip::cross_validate_depth(xt, ct, folds, seed, min_leaf);
    const fairflip::DecisionTree tree = fairflip::fit_tree(xt, ct, cv.chosen_depth, min_leaf);
    std::size_t hits = 0;
    for (std::size_t i : test_rows)
      if (fairflip::tree_predict(tree, x.row_ptr(i)) == classes[i]) ++hits;
    const double accuracy =
        static_cast<double>(hits) / static_cast<double>(test_rows.size());

    // Recompute the (epsilon, delta) pair from raw material, never cached.
    const double epsilon = fairflip::parity_gap(y_tilde, d.group);
    double delta = 0.0;
    if (!d.merit_columns.empty()) {
      fairflip::LabeledDataset std_ds = d;
      if (!std_ds.standardized) std_ds = fairflip::standardize_by_group(d).first;
      const std::vector<double> xbar = fairflip::merit_means(std_ds);
      long long pos = 0;
      for (std::int8_t yy : y_tilde)
        if (yy > 0) ++pos;
      if (pos > 0) {
        for (std::size_t k = 0; k < std_ds.merit_columns.size(); ++k) {
          double sum = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            if (y_tilde[i] > 0) sum += std_ds.features(i, std_ds.merit_columns[k]);
          delta = std::max(delta, std::abs(sum / static_cast<double>(pos) - xbar[k]));
        }
      }
    }

    json j;
    j["spec_version"] = kSpecVersion;
    j["tree"] = json::parse(fairflip::tree_to_json(tree, names));
    j["text"] = fairflip::render_text(tree, names);
    j["cv"] = {{"mean_accuracy", cv.mean_accuracy},
               {"chosen_depth", cv.chosen_depth},
               {"warnings", cv.warnings}};
    j["summary"] = {{"accuracy", accuracy}, {"epsilon", epsilon}, {"delta", delta}};
    std::array<std::size_t, 3> class_counts = {0, 0, 0};
    for (fairflip::FlipClass c : classes) ++class_counts[static_cast<std::size_t>(c)];
    j["class_counts"] = {{"NO_CHANGE", class_counts[0]},
                         {"POSITIVE", class_counts[1]},
                         {"NEGATIVE", class_counts[2]}};
    j["legend"] = {{"group", {{"0", d.adv_category}, {"1", d.dis_category}}}};
    j["split_fraction"] = split_fraction;
    j["seed"] = seed;
    j["train_rows"] = train_rows.size();
    j["test_rows"] = test_rows.size();
    *report_json = dup_string(j.dump(2));
    return FF_OK;
  });
}

int ff_model_to_json(const ff_model* model, char** out) {
  return guarded([&]() -> int {
    if (!model || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    *out = dup_string(fairflip::model_to_json(model->model));
    return FF_OK;
  });
}

int ff_model_from_json(const char* text, ff_model** out) {
  return guarded([&]() -> int {
    if (!text || !out) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    auto handle = std::make_unique<ff_model>();
    handle->model = fairflip::model_from_json(text);
    *out = handle.release();
    return FF_OK;
  });
}

int ff_model_predict(const ff_model* model, const double* features, size_t p,
                     const char* group_category, double* score, int* label) {
  return guarded([&]() -> int {
    if (!model || !features || !group_category || !score || !label)
      return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const std::vector<double> x(features, features + p);
    const fairflip::Prediction pred = fairflip::predict(model->model, x, group_category);
    *score = pred.score;
    *label = pred.label;
    return FF_OK;
  });
}

int ff_evaluate(const ff_model* model, const ff_dataset* ds, char** metrics_json) {
  return guarded([&]() -> int {
    if (!model || !ds || !metrics_json) return set_error(FF_ERR_INVALID_ARGUMENT, "null argument");
    const fairflip::LabeledDataset& d = ds->ds;
    const fairflip::Matrix& raw = d.raw_features();
    const std::size_t n = d.num_rows();
    std::vector<double> scores(n);
    std::vector<std::int8_t> predictions(n);
    std::vector<double> row(d.num_features());
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d.num_features(); ++j) row[j] = raw(i, j);
      const std::string& cat =
          d.group[i] == fairflip::Group::Adv ? d.adv_category : d.dis_category;
      const fairflip::Prediction pred = fairflip::predict(model->model, row, cat);
      scores[i] = pred.score;
      predictions[i] = pred.label;
      if (d.labels[i] > 0)
        (pred.label > 0 ? tp : fn) += 1;
      else
        (pred.label > 0 ? fp : tn) += 1;
    }
    json j;
    j["spec_version"] = kSpecVersion;
    j["auc"] = fairflip::auc(scores, d.labels);
    j["parity_gap"] = fairflip::parity_gap(predictions, d.group);
    j["confusion"] = {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}};
    j["n"] = n;
    *metrics_json = dup_string(j.dump(2));
    return FF_OK;
  });
}

void ff_model_free(ff_model* model) { delete model; }

}  // extern "C"
