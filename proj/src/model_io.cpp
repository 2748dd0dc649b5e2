#include "fairflip/model_io.hpp"

#include "json.hpp"

namespace fairflip {

namespace {

using nlohmann::json;

json standardization_to_json(const StandardizationParams& params,
                             const std::vector<std::string>& columns,
                             const std::string& adv_category, const std::string& dis_category) {
  json out = json::object();
  for (int g = 0; g < 2; ++g) {
    const auto& cols = params.per_group[g];
    if (cols.empty()) continue;
    json per_col = json::object();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const std::string name = j < columns.size() ? columns[j] : "x" + std::to_string(j + 1);
      per_col[name] = {{"mean", cols[j].mean}, {"std", cols[j].stddev}};
    }
    out[g == 0 ? adv_category : dis_category] = std::move(per_col);
  }
  return out;
}

StandardizationParams standardization_from_json(const json& j,
                                                const std::vector<std::string>& columns,
                                                const std::string& adv_category,
                                                const std::string& dis_category) {
  StandardizationParams params;
  for (int g = 0; g < 2; ++g) {
    const std::string& key = g == 0 ? adv_category : dis_category;
    if (!j.contains(key)) continue;
    const json& per_col = j.at(key);
    auto& cols = params.per_group[g];
    cols.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const json& m = per_col.at(columns[c]);
      cols[c] = {m.at("mean").get<double>(), m.at("std").get<double>()};
    }
  }
  return params;
}

}  // namespace

std::string model_to_json(const AnyModel& model) {
  json j;
  if (std::holds_alternative<LogisticModel>(model)) {
    const auto& m = std::get<LogisticModel>(model);
    j["kind"] = "logistic";
    j["beta0"] = m.beta0;
    j["beta"] = m.beta;
    j["lambda"] = m.ridge_lambda;
    j["columns"] = m.columns;
    j["group_values"] = {{"ADV", m.adv_category}, {"DIS", m.dis_category}};
    j["standardization"] =
        standardization_to_json(m.standardization, m.columns, m.adv_category, m.dis_category);
  } else {
    const auto& m = std::get<SvmModel>(model);
    j["kind"] = "svm";
    j["b"] = m.b;
    j["w"] = m.w;
    j["C"] = m.C;
    j["columns"] = m.columns;
    j["group_values"] = {{"ADV", m.adv_category}, {"DIS", m.dis_category}};
    j["standardization"] =
        standardization_to_json(m.standardization, m.columns, m.adv_category, m.dis_category);
  }
  return j.dump(2);
}

AnyModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(ErrorKind::Data, std::string("model JSON parse failure: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const std::vector<std::string> columns = j.at("columns").get<std::vector<std::string>>();
    const std::string adv = j.at("group_values").at("ADV").get<std::string>();
    const std::string dis = j.at("group_values").at("DIS").get<std::string>();
    if (kind == "logistic") {
      LogisticModel m;
      m.beta0 = j.at("beta0").get<double>();
      m.beta = j.at("beta").get<std::vector<double>>();
      m.ridge_lambda = j.at("lambda").get<double>();
      m.columns = columns;
      m.adv_category = adv;
      m.dis_category = dis;
      m.standardization = standardization_from_json(j.at("standardization"), columns, adv, dis);
      if (m.beta.size() != columns.size())
        raise(ErrorKind::Data, "model JSON: beta length does not match columns");
      return m;
    }
    if (kind == "svm") {
      SvmModel m;
      m.b = j.at("b").get<double>();
      m.w = j.at("w").get<std::vector<double>>();
      m.C = j.at("C").get<double>();
      m.columns = columns;
      m.adv_category = adv;
      m.dis_category = dis;
      m.standardization = standardization_from_json(j.at("standardization"), columns, adv, dis);
      if (m.w.size() != columns.size())
        raise(ErrorKind::Data, "model JSON: w length does not match columns");
      return m;
    }
    raise(ErrorKind::Data, "model JSON: unknown kind '" + kind + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorKind::Data, std::string("model JSON structure error: ") + e.what());
  }
}

void attach_dataset_metadata(AnyModel& model, const LabeledDataset& ds,
                             const StandardizationParams& params) {
  auto apply = [&](auto& m) {
    m.standardization = params;
    m.columns = ds.column_names;
    m.adv_category = ds.adv_category;
    m.dis_category = ds.dis_category;
  };
  if (std::holds_alternative<LogisticModel>(model))
    apply(std::get<LogisticModel>(model));
  else
    apply(std::get<SvmModel>(model));
}

}  // namespace fairflip
