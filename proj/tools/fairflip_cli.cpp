// fairflip command line tool. Talks to the library exclusively through the
// C interface in fairflip/fairflip.h; all file output is atomic
// (write-to-temp then rename) so interrupted runs never leave partial files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairflip/fairflip.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kSpecVersion = "1.0";

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitData = 3;
constexpr int kExitSolve = 4;

int exit_code_for(int status) {
  switch (status) {
    case FF_OK: return kExitOk;
    case FF_ERR_SCHEMA:
    case FF_ERR_INVALID_ARGUMENT: return kExitSchema;
    case FF_ERR_SOLVE: return kExitSolve;
    default: return kExitData;
  }
}

[[noreturn]] void fail(int status) {
  std::cerr << "error: " << ff_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(int status) {
  if (status != FF_OK) fail(status);
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  ff_string_free(s);
  return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "error: cannot write " << tmp << "\n";
      std::exit(kExitData);
    }
    out << content;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::cerr << "error: cannot rename " << tmp << " to " << path << "\n";
    std::exit(kExitData);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(kExitData);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SchemaFlags {
  std::string preset;
  std::string group_col;
  std::vector<std::string> group_values;
  std::string label_col;
  std::string positive_value;
  std::vector<std::string> merit_cols;

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Schema preset JSON file");
    cmd->add_option("--group-col", group_col, "Protected-attribute column name");
    cmd->add_option("--group-values", group_values,
                    "The two category values; the first wins ADV on a rate tie")
        ->delimiter(',');
    cmd->add_option("--label-col", label_col, "Outcome column name");
    cmd->add_option("--positive-value", positive_value, "Label value mapped to +1");
    cmd->add_option("--merit-cols", merit_cols, "Merit attribute column names")->delimiter(',');
  }

  json to_json() const {
    json j;
    if (!preset.empty()) {
      const json p = json::parse(read_file(preset));
      j = p.contains("schema") ? p.at("schema") : p;
    }
    if (!group_col.empty()) j["group_column"] = group_col;
    if (group_values.size() == 2) {
      j["category_a"] = group_values[0];
      j["category_b"] = group_values[1];
    } else if (!group_values.empty()) {
      std::cerr << "error: --group-values needs exactly two values\n";
      std::exit(kExitSchema);
    }
    if (!label_col.empty()) j["label_column"] = label_col;
    if (!positive_value.empty()) j["positive_value"] = positive_value;
    if (!merit_cols.empty()) j["merit_columns"] = merit_cols;
    for (const char* key : {"group_column", "category_a", "category_b", "label_column",
                            "positive_value"}) {
      if (!j.contains(key)) {
        std::cerr << "error: missing schema field '" << key
                  << "' (pass the flag or a --preset file)\n";
        std::exit(kExitSchema);
      }
    }
    return j;
  }
};

struct DatasetGuard {
  ff_dataset* ds = nullptr;
  ~DatasetGuard() { ff_dataset_free(ds); }
};
struct ResultGuard {
  ff_result* r = nullptr;
  ~ResultGuard() { ff_result_free(r); }
};
struct ModelGuard {
  ff_model* m = nullptr;
  ~ModelGuard() { ff_model_free(m); }
};

void write_config_echo(const fs::path& out_dir, const std::string& subcommand, const json& flags) {
  json j;
  j["spec_version"] = kSpecVersion;
  j["subcommand"] = subcommand;
  j["flags"] = flags;
  write_atomic(out_dir / "config.json", j.dump(2) + "\n");
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << dir << "\n";
    std::exit(kExitData);
  }
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demographic-bias measurement and parity-constrained training"};
  app.require_subcommand(1);

  // ---- measure ----
  auto* measure = app.add_subcommand("measure", "Report the positive-rate gap of a dataset");
  std::string m_input, m_out;
  SchemaFlags m_schema;
  measure->add_option("--input", m_input, "CSV file")->required();
  m_schema.attach(measure);
  measure->add_option("--out", m_out, "Output directory (also echoes config)");

  // ---- debias ----
  auto* debias = app.add_subcommand("debias", "Flip labels under budget and train a model");
  std::string d_input, d_out = ".";
  SchemaFlags d_schema;
  double d_epsilon = 0.01;
  double d_delta = -1.0;  // negative means off
  std::string d_model = "logistic";
  std::string d_mode = "alternating";
  double d_C = 1.0, d_lambda = 1e-6, d_gap_tol = 1e-4, d_big_m = 20.0;
  std::size_t d_max_iter = 200, d_max_rounds = 50, d_node_limit = 1000000;
  bool d_no_directional = false;
  debias->add_option("--input", d_input, "CSV file")->required();
  d_schema.attach(debias);
  debias->add_option("--out", d_out, "Output directory");
  debias->add_option("--epsilon", d_epsilon, "Target parity gap");
  debias->add_option("--delta", d_delta, "Merit tolerance (omit to disable)");
  debias->add_option("--model", d_model, "logistic or svm")
      ->check(CLI::IsMember({"logistic", "svm"}));
  debias->add_option("--mode", d_mode, "svm mode: alternating or exact_enum")
      ->check(CLI::IsMember({"alternating", "exact_enum"}));
  debias->add_option("--C", d_C, "SVM penalty");
  debias->add_option("--lambda", d_lambda, "Logistic ridge");
  debias->add_option("--gap-tol", d_gap_tol, "Outer-approximation gap tolerance");
  debias->add_option("--max-iter", d_max_iter, "Cut-round limit");
  debias->add_option("--big-m", d_big_m, "Coefficient box bound");
  debias->add_option("--max-rounds", d_max_rounds, "Alternating-round limit");
  debias->add_option("--node-limit", d_node_limit, "Branch-and-bound node limit");
  debias->add_flag("--no-directional", d_no_directional,
                   "Allow flips in both directions within each group");

  // ---- tradeoff ----
  auto* tradeoff = app.add_subcommand("tradeoff", "Sweep epsilon and tabulate merit changes");
  std::string t_input, t_out = ".";
  SchemaFlags t_schema;
  double t_delta = -1.0;
  std::string t_model = "logistic";
  std::string t_mode = "alternating";
  double t_C = 1.0, t_lambda = 1e-6;
  std::vector<double> t_grid;
  bool t_no_directional = false;
  tradeoff->add_option("--input", t_input, "CSV file")->required();
  t_schema.attach(tradeoff);
  tradeoff->add_option("--out", t_out, "Output directory");
  tradeoff->add_option("--delta", t_delta, "Merit tolerance (omit to disable)");
  tradeoff->add_option("--model", t_model, "logistic or svm")
      ->check(CLI::IsMember({"logistic", "svm"}));
  tradeoff->add_option("--mode", t_mode, "svm mode")
      ->check(CLI::IsMember({"alternating", "exact_enum"}));
  tradeoff->add_option("--C", t_C, "SVM penalty");
  tradeoff->add_option("--lambda", t_lambda, "Logistic ridge");
  tradeoff->add_option("--eps-grid", t_grid, "Explicit ascending epsilon grid")->delimiter(',');
  tradeoff->add_flag("--no-directional", t_no_directional, "Allow flips in both directions");

  // ---- explain ----
  auto* explain = app.add_subcommand("explain", "Fit a three-class tree over flip outcomes");
  std::string e_input, e_flips, e_out = ".";
  SchemaFlags e_schema;
  std::uint64_t e_seed = 0;
  double e_split = 0.7;
  std::size_t e_folds = 5, e_min_leaf = 5;
  explain->add_option("--input", e_input, "CSV file")->required();
  explain->add_option("--flips", e_flips, "Flip report from the debias subcommand")->required();
  e_schema.attach(explain);
  explain->add_option("--out", e_out, "Output directory");
  explain->add_option("--seed", e_seed, "Split and fold seed");
  explain->add_option("--split", e_split, "Training fraction of the stratified split");
  explain->add_option("--folds", e_folds, "Cross-validation folds");
  explain->add_option("--min-leaf", e_min_leaf, "Minimum rows per leaf");

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "Score a stored model on a dataset");
  std::string v_input, v_model_file, v_out;
  SchemaFlags v_schema;
  evaluate->add_option("--input", v_input, "CSV file")->required();
  evaluate->add_option("--model-file", v_model_file, "Model JSON produced by debias")->required();
  v_schema.attach(evaluate);
  evaluate->add_option("--out", v_out, "Output directory");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a calibrated synthetic dataset");
  std::string s_out = ".";
  std::size_t s_n = 1000, s_p = 4;
  double s_alpha = 0.3, s_fraction = 0.5;
  std::uint64_t s_seed = 0;
  synth->add_option("--out", s_out, "Output directory");
  synth->add_option("--n", s_n, "Rows");
  synth->add_option("--p", s_p, "Feature count");
  synth->add_option("--alpha", s_alpha, "Target positive-rate gap");
  synth->add_option("--group-fraction", s_fraction, "Expected fraction in the first group");
  synth->add_option("--seed", s_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSchema;
  }

  if (measure->parsed()) {
    const json schema = m_schema.to_json();
    DatasetGuard g;
    check(ff_dataset_load_csv(m_input.c_str(), schema.dump().c_str(), &g.ds));
    char* report = nullptr;
    check(ff_measure(g.ds, &report));
    const std::string text = take_string(report);
    std::cout << text << "\n";
    if (!m_out.empty()) {
      const fs::path dir = ensure_out_dir(m_out);
      write_atomic(dir / "measure.json", text + "\n");
      write_config_echo(dir, "measure", json{{"input", m_input}, {"schema", schema}});
    }
    return kExitOk;
  }

  if (debias->parsed()) {
    const json schema = d_schema.to_json();
    DatasetGuard g;
    check(ff_dataset_load_csv(d_input.c_str(), schema.dump().c_str(), &g.ds));
    json options;
    options["epsilon"] = d_epsilon;
    if (d_delta >= 0.0) options["delta"] = d_delta;
    options["kind"] = d_model;
    options["mode"] = d_mode;
    options["C"] = d_C;
    options["lambda"] = d_lambda;
    options["gap_tol"] = d_gap_tol;
    options["max_iter"] = d_max_iter;
    options["big_m"] = d_big_m;
    options["max_rounds"] = d_max_rounds;
    options["node_limit"] = d_node_limit;
    options["directional"] = !d_no_directional;
    ResultGuard r;
    check(ff_debias(g.ds, options.dump().c_str(), &r.r));
    char* result_json = nullptr;
    check(ff_result_json(r.r, &result_json));
    const std::string result_text = take_string(result_json);
    char* flips_csv = nullptr;
    check(ff_result_flips_csv(r.r, g.ds, &flips_csv));
    const std::string flips_text = take_string(flips_csv);
    ModelGuard m;
    check(ff_result_model(r.r, &m.m));
    char* model_json = nullptr;
    check(ff_model_to_json(m.m, &model_json));
    const std::string model_text = take_string(model_json);

    const fs::path dir = ensure_out_dir(d_out);
    write_atomic(dir / "result.json", result_text + "\n");
    write_atomic(dir / "flips.csv", flips_text);
    write_atomic(dir / "model.json", model_text + "\n");
    write_config_echo(dir, "debias",
                      json{{"input", d_input}, {"schema", schema}, {"options", options}});
    const json parsed = json::parse(result_text);
    if (parsed.at("gap_limit").get<bool>()) {
      std::cerr << "warning: stopped at the iteration limit with gap "
                << parsed.at("final_gap").get<double>() << "; outputs carry the partial trace\n";
      return kExitSolve;
    }
    std::cout << "debias: " << parsed.at("flipped_rows").get<std::size_t>()
              << " rows flipped, achieved parity " << parsed.at("achieved_parity").get<double>()
              << "\n";
    return kExitOk;
  }

  if (tradeoff->parsed()) {
    const json schema = t_schema.to_json();
    DatasetGuard g;
    check(ff_dataset_load_csv(t_input.c_str(), schema.dump().c_str(), &g.ds));
    json options;
    if (t_delta >= 0.0) options["delta"] = t_delta;
    options["kind"] = t_model;
    options["mode"] = t_mode;
    options["C"] = t_C;
    options["lambda"] = t_lambda;
    options["directional"] = !t_no_directional;
    if (!t_grid.empty()) options["epsilon_grid"] = t_grid;
    char* csv = nullptr;
    check(ff_tradeoff(g.ds, options.dump().c_str(), &csv));
    const std::string text = take_string(csv);
    const fs::path dir = ensure_out_dir(t_out);
    write_atomic(dir / "tradeoff.csv", text);
    write_config_echo(dir, "tradeoff",
                      json{{"input", t_input}, {"schema", schema}, {"options", options}});
    std::cout << text;
    return kExitOk;
  }

  if (explain->parsed()) {
    const json schema = e_schema.to_json();
    DatasetGuard g;
    check(ff_dataset_load_csv(e_input.c_str(), schema.dump().c_str(), &g.ds));
    const std::string flips_text = read_file(e_flips);
    json options{{"seed", e_seed},
                 {"split_fraction", e_split},
                 {"folds", e_folds},
                 {"min_leaf", e_min_leaf}};
    char* report = nullptr;
    check(ff_explain(g.ds, flips_text.c_str(), options.dump().c_str(), &report));
    const std::string text = take_string(report);
    const json parsed = json::parse(text);
    const fs::path dir = ensure_out_dir(e_out);
    write_atomic(dir / "explain.json", text + "\n");
    write_atomic(dir / "tree.json", parsed.at("tree").dump(2) + "\n");
    write_atomic(dir / "tree.txt", parsed.at("text").get<std::string>());
    write_config_echo(dir, "explain",
                      json{{"input", e_input},
                           {"flips", e_flips},
                           {"schema", schema},
                           {"options", options}});
    std::cout << parsed.at("text").get<std::string>();
    const json& summary = parsed.at("summary");
    std::cout << "accuracy " << summary.at("accuracy").get<double>() << ", epsilon "
              << summary.at("epsilon").get<double>() << ", delta "
              << summary.at("delta").get<double>() << "\n";
    return kExitOk;
  }

  if (evaluate->parsed()) {
    const json schema = v_schema.to_json();
    DatasetGuard g;
    check(ff_dataset_load_csv(v_input.c_str(), schema.dump().c_str(), &g.ds));
    const std::string model_text = read_file(v_model_file);
    ModelGuard m;
    check(ff_model_from_json(model_text.c_str(), &m.m));
    char* metrics = nullptr;
    check(ff_evaluate(m.m, g.ds, &metrics));
    const std::string text = take_string(metrics);
    std::cout << text << "\n";
    if (!v_out.empty()) {
      const fs::path dir = ensure_out_dir(v_out);
      write_atomic(dir / "metrics.json", text + "\n");
      write_config_echo(dir, "evaluate",
                        json{{"input", v_input}, {"model_file", v_model_file}, {"schema", schema}});
    }
    return kExitOk;
  }

  if (synth->parsed()) {
    DatasetGuard g;
    char* planted = nullptr;
    check(ff_dataset_synthetic(s_n, s_p, s_alpha, s_fraction, s_seed, &g.ds, &planted));
    const std::string truth = take_string(planted);
    char* csv = nullptr;
    check(ff_dataset_write_csv_text(g.ds, &csv));
    const std::string data = take_string(csv);
    const fs::path dir = ensure_out_dir(s_out);
    write_atomic(dir / "data.csv", data);
    write_atomic(dir / "truth.json", truth + "\n");
    write_config_echo(dir, "synth",
                      json{{"n", s_n},
                           {"p", s_p},
                           {"alpha", s_alpha},
                           {"group_fraction", s_fraction},
                           {"seed", s_seed}});
    std::cout << "synth: wrote " << (dir / "data.csv").string() << "\n";
    return kExitOk;
  }

  return kExitOk;
}
